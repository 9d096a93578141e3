use std::f64::consts::TAU;

use super::FemError;

/// Tensor-product mesh of biquadratic elements in `(r, θ)`.
///
/// Nodes are numbered ring by ring, `node = i * P + j` with `P = 2 n_θ`
/// angular nodes, so the Dirichlet ring `r = 1` occupies the last `P`
/// indices and the interior unknowns are exactly `0..dof_count()`.
/// The node at `θ = 2π` is identified with `θ = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarMesh {
    n_r: usize,
    n_theta: usize,
    r_nodes: Vec<f64>,
    theta_nodes: Vec<f64>,
    dr: f64,
    dtheta: f64,
}

/// Geometry and global node numbers of one element; `nodes[3 * a + b]` is
/// the node at radial position `a` and angular position `b`.
#[derive(Debug, Clone, Copy)]
pub struct Element {
    pub nodes: [usize; 9],
    pub r0: f64,
    pub r1: f64,
    pub theta0: f64,
    pub theta1: f64,
}

impl PolarMesh {
    pub fn new(n_r: usize, n_theta: usize) -> Result<Self, FemError> {
        if n_r < 4 || n_theta < 4 {
            return Err(FemError::InvalidMesh(format!(
                "need at least 4 elements per direction, got {n_r} x {n_theta}"
            )));
        }
        // uniform radial node spacing h with the innermost ring at h/2
        let h = 1.0 / (2.0 * n_r as f64 + 0.5);
        let r_min = 0.5 * h;
        let mut r_nodes: Vec<f64> = (0..=2 * n_r).map(|i| r_min + h * i as f64).collect();
        *r_nodes.last_mut().unwrap() = 1.0;
        let p = 2 * n_theta;
        let dtheta = TAU / p as f64;
        let theta_nodes = (0..p).map(|j| dtheta * j as f64).collect();
        Ok(Self {
            n_r,
            n_theta,
            r_nodes,
            theta_nodes,
            dr: h,
            dtheta,
        })
    }

    /// Builds the mesh from node counts: `2 n_r + 1` radial and `2 n_θ` angular nodes.
    pub fn from_node_counts(radial: usize, angular: usize) -> Result<Self, FemError> {
        if radial % 2 == 0 || angular % 2 == 1 {
            return Err(FemError::InvalidMesh(format!(
                "quadratic elements need an odd radial and even angular node count, got {radial} x {angular}"
            )));
        }
        Self::new((radial - 1) / 2, angular / 2)
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn r_nodes(&self) -> &[f64] {
        &self.r_nodes
    }

    pub fn theta_nodes(&self) -> &[f64] {
        &self.theta_nodes
    }

    pub fn r_min(&self) -> f64 {
        self.r_nodes[0]
    }

    /// Radial distance between consecutive nodes.
    pub fn radial_spacing(&self) -> f64 {
        self.dr
    }

    /// Angular distance between consecutive nodes, `π / n_θ`.
    pub fn angular_spacing(&self) -> f64 {
        self.dtheta
    }

    pub fn radial_node_count(&self) -> usize {
        self.r_nodes.len()
    }

    pub fn angular_node_count(&self) -> usize {
        self.theta_nodes.len()
    }

    pub fn node_count(&self) -> usize {
        self.radial_node_count() * self.angular_node_count()
    }

    /// Unknowns after removing the Dirichlet ring.
    pub fn dof_count(&self) -> usize {
        2 * self.n_r * self.angular_node_count()
    }

    pub fn node_index(&self, i: usize, j: usize) -> usize {
        let p = self.angular_node_count();
        i * p + j % p
    }

    pub fn element(&self, er: usize, et: usize) -> Element {
        let mut nodes = [0; 9];
        for a in 0..3 {
            for b in 0..3 {
                nodes[3 * a + b] = self.node_index(2 * er + a, 2 * et + b);
            }
        }
        Element {
            nodes,
            r0: self.r_nodes[2 * er],
            r1: self.r_nodes[2 * er + 2],
            theta0: 2.0 * self.dtheta * et as f64,
            theta1: 2.0 * self.dtheta * (et + 1) as f64,
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        (0..self.n_r).flat_map(move |er| (0..self.n_theta).map(move |et| self.element(er, et)))
    }
}

/// 1-D quadratic Lagrange basis on `[-1, 1]` with nodes `-1, 0, 1`.
pub(crate) fn lagrange2(x: f64) -> [f64; 3] {
    [0.5 * x * (x - 1.0), 1.0 - x * x, 0.5 * x * (x + 1.0)]
}

pub(crate) fn lagrange2_deriv(x: f64) -> [f64; 3] {
    [x - 0.5, -2.0 * x, x + 0.5]
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    // Newton on P_n starting from the Chebyshev-like initial guesses
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}
