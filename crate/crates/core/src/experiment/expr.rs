//! Arithmetic on numeric config values: `26pi/40`, `1/400`, `2.5e3`, `-(pi/2)`.

use std::f64::consts::PI;

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<f64, String> {
        let mut v = self.term()?;
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let r = self.term()?;
            v = if op == b'+' { v + r } else { v - r };
        }
        Ok(v)
    }

    fn term(&mut self) -> Result<f64, String> {
        let mut v = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    v *= self.unary()?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    v /= self.unary()?;
                }
                // implicit product: `2pi`, `3(pi/4)`
                Some(c) if c == b'(' || c.is_ascii_alphabetic() => v *= self.unary()?,
                _ => return Ok(v),
            }
        }
    }

    fn unary(&mut self) -> Result<f64, String> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<f64, String> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err("missing ')'".into());
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.s.len() && self.s[self.pos].is_ascii_alphabetic() {
                    self.pos += 1;
                }
                match &self.s[start..self.pos] {
                    b"pi" | b"PI" | b"Pi" => Ok(PI),
                    other => Err(format!("unknown name '{}'", String::from_utf8_lossy(other))),
                }
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                let s = self.s;
                let mut i = self.pos;
                while i < s.len() && (s[i].is_ascii_digit() || s[i] == b'.') {
                    i += 1;
                }
                // exponent only when followed by digits, so `2e` is not eaten
                if i < s.len() && (s[i] == b'e' || s[i] == b'E') {
                    let mut j = i + 1;
                    if j < s.len() && (s[j] == b'+' || s[j] == b'-') {
                        j += 1;
                    }
                    if j < s.len() && s[j].is_ascii_digit() {
                        while j < s.len() && s[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                self.pos = i;
                let text = std::str::from_utf8(&s[start..i]).unwrap();
                text.parse::<f64>().map_err(|_| format!("bad number '{text}'"))
            }
            Some(c) => Err(format!("unexpected '{}'", c as char)),
            None => Err("unexpected end of expression".into()),
        }
    }
}

/// Evaluates a numeric expression with `+ - * /`, parentheses and `pi`.
pub fn eval(text: &str) -> Result<f64, String> {
    let mut p = Parser {
        s: text.as_bytes(),
        pos: 0,
    };
    let v = p.expr()?;
    if p.peek().is_some() {
        return Err(format!("trailing input in '{}'", text.trim()));
    }
    if !v.is_finite() {
        return Err(format!("'{}' is not finite", text.trim()));
    }
    Ok(v)
}
