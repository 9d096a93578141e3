use std::f64::consts::PI;

use heatsleuth_core::fem::{FieldHistory, PolarMesh};
use heatsleuth_core::shape::ShapeParams;
use heatsleuth_core::spectral::{EigenBasis, SpectralForward};
use heatsleuth_core::strategy::{
    angular_derivative, circle_distance, decide_direction, measure_triple, run_strategy, Direction, StrategyParams,
    TruthFlux, WindowFlag,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn circle_truth() -> (ShapeParams, f64) {
    (ShapeParams::circle(0.7, PI / 2.0, 0.2).unwrap(), 50.0)
}

fn fine_history() -> FieldHistory {
    let (shape, b) = circle_truth();
    let mesh = PolarMesh::new(11, 11).unwrap();
    FieldHistory::for_shape(mesh, 1.0 / 400.0, &shape, b, 12).unwrap()
}

#[test]
fn finite_difference_sign_matches_series_slope() {
    let (shape, b) = circle_truth();
    let series = SpectralForward::new(&shape, b, EigenBasis::build(200).unwrap());
    let mut fem = fine_history();
    let dth = PI / 10.0;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for (theta, t) in [
        (26.0 * PI / 40.0, 0.2),
        (16.0 * PI / 40.0, 0.425),
        (6.0 * PI / 40.0, 0.2),
    ] {
        let tri = measure_triple(0, theta, t, dth, &mut fem, 0.0, &mut rng).unwrap();
        let fd = angular_derivative(tri.values, dth);
        let (f, slope) = series.flux_and_slope(theta, t).unwrap();
        let exact = f.signum() * slope;
        assert_eq!(fd > 0.0, exact > 0.0, "theta {theta}: fd {fd}, series {exact}");
    }
    let tri = measure_triple(0, 26.0 * PI / 40.0, 0.2, dth, &mut fem, 0.0, &mut rng).unwrap();
    assert_eq!(decide_direction(angular_derivative(tri.values, dth)), Direction::Cw);
    let tri = measure_triple(1, 16.0 * PI / 40.0, 0.425, dth, &mut fem, 0.0, &mut rng).unwrap();
    assert_eq!(decide_direction(angular_derivative(tri.values, dth)), Direction::Ccw);
}

#[test]
fn series_flux_peaks_toward_the_source() {
    let (shape, b) = circle_truth();
    let series = SpectralForward::new(&shape, b, EigenBasis::build(200).unwrap());
    let (best, _) = (0..400)
        .map(|i| 2.0 * PI * i as f64 / 400.0)
        .map(|th| (th, series.flux(th, 0.2).unwrap().abs()))
        .fold((0.0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
    assert!(circle_distance(best, PI / 2.0) < 2.0 * PI / 400.0, "argmax {best}");
}

#[test]
fn noiseless_loop_closes_in_on_the_source() {
    let mut fem = fine_history();
    let params = StrategyParams::standard(PI / 10.0).half_step();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let out = run_strategy(&params, &mut fem, 26.0 * PI / 40.0, 0.0, &mut rng, |_, k, _| Ok(k)).unwrap();
    let path = out.sensor_path();
    assert!(path.len() >= 2);
    assert!((path[1] - 16.0 * PI / 40.0).abs() < 1e-12, "{path:?}");
    assert!(matches!(
        out.windows.last().unwrap().flag,
        WindowFlag::Final | WindowFlag::Stop(_)
    ));
    assert!(
        circle_distance(out.final_theta, PI / 2.0) <= PI / 8.0 + 1e-12,
        "{path:?}"
    );
}

struct Counting<'a>(&'a mut FieldHistory, usize);

impl TruthFlux for Counting<'_> {
    fn flux(&mut self, theta: f64, t: f64) -> Result<f64, heatsleuth_core::strategy::StrategyError> {
        self.1 += 1;
        TruthFlux::flux(self.0, theta, t)
    }
}

#[test]
fn each_window_costs_n_t_plus_three_truth_evaluations() {
    let mut fem = fine_history();
    let mut truth = Counting(&mut fem, 0);
    let params = StrategyParams::standard(PI / 10.0).half_step();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let out = run_strategy(&params, &mut truth, 26.0 * PI / 40.0, 0.05, &mut rng, |d, _, _| {
        Ok(d.records.len())
    })
    .unwrap();
    let with_triple = out.windows.iter().filter(|w| w.triple.is_some()).count();
    assert_eq!(truth.1, out.windows.len() * params.n_t + 3 * with_triple);
    assert_eq!(out.data.records.len(), out.windows.len() * params.n_t);
}
