//! Bound curves: points carrying a lower and/or upper value and the name of the
//! inequality that produced them.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// What the abscissa of a curve measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Abscissa {
    /// Radius `r` of a small ball; values are bounds on `φ(r)`.
    R,
    /// Covering radius `ε`; values are bounds on `H(ε)`.
    Epsilon,
}

impl Abscissa {
    pub fn column(self) -> &'static str {
        match self {
            Abscissa::R => "r",
            Abscissa::Epsilon => "epsilon",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundPoint {
    pub x: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub method: String,
    pub params: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCurve {
    pub abscissa: Abscissa,
    pub points: Vec<BoundPoint>,
}

impl BoundCurve {
    pub fn new(abscissa: Abscissa) -> Self {
        BoundCurve { abscissa, points: Vec::new() }
    }

    pub fn push(&mut self, x: f64, lower: Option<f64>, upper: Option<f64>, method: &str, params: &str) {
        self.points.push(BoundPoint { x, lower, upper, method: method.to_string(), params: params.to_string() });
    }

    /// `(x, upper)` pairs of the points that carry an upper value.
    pub fn uppers(&self) -> Vec<(f64, f64)> {
        self.points.iter().filter_map(|p| p.upper.map(|u| (p.x, u))).collect()
    }

    /// `(x, lower)` pairs of the points that carry a lower value.
    pub fn lowers(&self) -> Vec<(f64, f64)> {
        self.points.iter().filter_map(|p| p.lower.map(|l| (p.x, l))).collect()
    }

    /// Columns `r|epsilon, lower, upper, method, params`; absent values are empty.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([self.abscissa.column(), "lower", "upper", "method", "params"])?;
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
        for p in &self.points {
            w.write_record([p.x.to_string(), opt(p.lower), opt(p.upper), p.method.clone(), p.params.clone()])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut c = BoundCurve::new(Abscissa::Epsilon);
        c.push(0.5, Some(1.0), None, "volumetric", "nu=1");
        c.push(0.25, None, Some(3.5), "lattice", "nu=1");
        let mut out = Vec::new();
        c.write_csv(&mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "epsilon,lower,upper,method,params\n0.5,1,,volumetric,nu=1\n0.25,,3.5,lattice,nu=1\n"
        );
        assert_eq!(c.uppers(), vec![(0.25, 3.5)]);
    }
}
