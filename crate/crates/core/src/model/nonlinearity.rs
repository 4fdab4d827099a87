use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients of the absorption term evaluated at one point `(x, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalCoefficients {
    pub alpha: f64,
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

/// Shape of the absorption `a(x, t, tau)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum NonlinearityForm {
    /// `a = 0`.
    Zero,
    /// `a = a2 |tau|^{alpha-2} tau`.
    PowerSign,
    /// `a = a0 |tau|^{alpha-1} + a1`.
    PowerAbsPlusOffset,
    /// Samples on an `(x_1, t, tau)` grid, multilinear in between.
    Tabulated(TabulatedNonlinearity),
}

/// Smallest `|tau|` used when a power derivative is singular at the origin.
const DERIVATIVE_FLOOR: f64 = 1e-12;

impl NonlinearityForm {
    pub fn eval(&self, x: &[f64], t: f64, c: &LocalCoefficients, tau: f64) -> Result<f64> {
        Ok(match self {
            NonlinearityForm::Zero => 0.0,
            NonlinearityForm::PowerSign => {
                if tau == 0.0 {
                    0.0
                } else {
                    c.a2 * tau.abs().powf(c.alpha - 1.0) * tau.signum()
                }
            }
            NonlinearityForm::PowerAbsPlusOffset => {
                let mag = if tau == 0.0 { 0.0 } else { tau.abs().powf(c.alpha - 1.0) };
                c.a0 * mag + c.a1
            }
            NonlinearityForm::Tabulated(tab) => tab.eval(x.first().copied().unwrap_or(0.0), t, tau)?,
        })
    }

    /// `d a / d tau`.
    pub fn derivative(&self, x: &[f64], t: f64, c: &LocalCoefficients, tau: f64) -> Result<f64> {
        let power_slope = |coef: f64| {
            let mag = tau.abs().max(if c.alpha < 2.0 { DERIVATIVE_FLOOR } else { 0.0 });
            if c.alpha == 2.0 {
                coef
            } else if mag == 0.0 {
                0.0
            } else {
                coef * (c.alpha - 1.0) * mag.powf(c.alpha - 2.0)
            }
        };
        Ok(match self {
            NonlinearityForm::Zero => 0.0,
            NonlinearityForm::PowerSign => power_slope(c.a2),
            NonlinearityForm::PowerAbsPlusOffset => power_slope(c.a0) * tau.signum(),
            NonlinearityForm::Tabulated(tab) => tab.slope(x.first().copied().unwrap_or(0.0), t, tau)?,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            NonlinearityForm::Zero => "zero",
            NonlinearityForm::PowerSign => "power_sign",
            NonlinearityForm::PowerAbsPlusOffset => "power_abs_plus_offset",
            NonlinearityForm::Tabulated(_) => "tabulated",
        }
    }
}

/// Tabulated absorption. Empty `points` or `times` mean no dependence on
/// that coordinate; `values` is laid out with `tau` fastest, then `t`, then `x_1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedNonlinearity {
    #[serde(default)]
    pub points: Vec<f64>,
    #[serde(default)]
    pub times: Vec<f64>,
    pub taus: Vec<f64>,
    pub values: Vec<f64>,
}

fn increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

/// Bracketing cell and weight of `z` on `axis`, clamped to the ends.
fn locate_clamped(axis: &[f64], z: f64) -> (usize, usize, f64) {
    if axis.len() <= 1 {
        return (0, 0, 0.0);
    }
    if z <= axis[0] {
        return (0, 0, 0.0);
    }
    let last = axis.len() - 1;
    if z >= axis[last] {
        return (last, last, 0.0);
    }
    let j = axis.partition_point(|&s| s <= z) - 1;
    (j, j + 1, (z - axis[j]) / (axis[j + 1] - axis[j]))
}

impl TabulatedNonlinearity {
    pub fn validate(&self) -> Result<()> {
        if self.taus.len() < 2 || !increasing(&self.taus) {
            return Err(Error::Structural("tabulated taus need at least 2 increasing entries".into()));
        }
        if !increasing(&self.points) || !increasing(&self.times) {
            return Err(Error::Structural("tabulated axes must be increasing".into()));
        }
        let expected = self.points.len().max(1) * self.times.len().max(1) * self.taus.len();
        if self.values.len() != expected {
            return Err(Error::Structural(format!(
                "tabulated nonlinearity needs {expected} values, got {}",
                self.values.len()
            )));
        }
        Ok(())
    }

    fn at(&self, ix: usize, it: usize, itau: usize) -> f64 {
        let nt = self.times.len().max(1);
        self.values[(ix * nt + it) * self.taus.len() + itau]
    }

    fn tau_cell(&self, tau: f64) -> Result<(usize, f64)> {
        let (lo, hi) = (self.taus[0], self.taus[self.taus.len() - 1]);
        if !(tau >= lo && tau <= hi) {
            return Err(Error::Extrapolation(format!(
                "tau = {tau} outside tabulated range [{lo}, {hi}]"
            )));
        }
        let j = (self.taus.partition_point(|&s| s <= tau) - 1).min(self.taus.len() - 2);
        Ok((j, (tau - self.taus[j]) / (self.taus[j + 1] - self.taus[j])))
    }

    /// Interpolate along `(x_1, t)` at fixed tau-node.
    fn plane(&self, x: f64, t: f64, itau: usize) -> f64 {
        let (x0, x1, wx) = locate_clamped(&self.points, x);
        let (t0, t1, wt) = locate_clamped(&self.times, t);
        let lerp = |a: f64, b: f64, w: f64| (1.0 - w) * a + w * b;
        lerp(
            lerp(self.at(x0, t0, itau), self.at(x0, t1, itau), wt),
            lerp(self.at(x1, t0, itau), self.at(x1, t1, itau), wt),
            wx,
        )
    }

    pub fn eval(&self, x: f64, t: f64, tau: f64) -> Result<f64> {
        let (j, w) = self.tau_cell(tau)?;
        Ok((1.0 - w) * self.plane(x, t, j) + w * self.plane(x, t, j + 1))
    }

    pub fn slope(&self, x: f64, t: f64, tau: f64) -> Result<f64> {
        let (j, _) = self.tau_cell(tau)?;
        Ok((self.plane(x, t, j + 1) - self.plane(x, t, j)) / (self.taus[j + 1] - self.taus[j]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coeffs(alpha: f64, a0: f64, a1: f64, a2: f64) -> LocalCoefficients {
        LocalCoefficients { alpha, a0, a1, a2, a3: 0.0 }
    }

    #[test]
    fn variant_formulas() {
        let c = coeffs(3.0, 0.0, 0.0, 1.0);
        assert_eq!(NonlinearityForm::PowerSign.eval(&[0.0], 0.0, &c, -2.0).unwrap(), -4.0);
        assert_eq!(NonlinearityForm::PowerSign.eval(&[0.0], 0.0, &c, 0.0).unwrap(), 0.0);
        let c = coeffs(2.0, 2.0, 1.0, 1.0);
        assert_eq!(NonlinearityForm::PowerAbsPlusOffset.eval(&[0.0], 0.0, &c, 3.0).unwrap(), 7.0);
        let c = coeffs(2.0, 2.0, 0.0, 1.0);
        assert_eq!(NonlinearityForm::PowerAbsPlusOffset.eval(&[0.0], 0.0, &c, 0.0).unwrap(), 0.0);
        assert_eq!(NonlinearityForm::Zero.eval(&[0.0], 0.0, &c, 5.0).unwrap(), 0.0);
    }

    #[test]
    fn power_sign_is_odd() {
        let c = coeffs(2.7, 0.0, 0.0, 1.3);
        for &tau in &[0.1, 1.0, 3.7] {
            let f = NonlinearityForm::PowerSign;
            let a = f.eval(&[0.0], 0.0, &c, tau).unwrap();
            let b = f.eval(&[0.0], 0.0, &c, -tau).unwrap();
            assert_eq!(a, -b);
        }
    }

    #[test]
    fn derivatives_match_differences() {
        let c = coeffs(2.6, 1.4, 0.3, 0.8);
        for form in [NonlinearityForm::PowerSign, NonlinearityForm::PowerAbsPlusOffset] {
            for &tau in &[-2.0, -0.3, 0.4, 1.9] {
                let h = 1e-6;
                let fd = (form.eval(&[0.0], 0.0, &c, tau + h).unwrap()
                    - form.eval(&[0.0], 0.0, &c, tau - h).unwrap())
                    / (2.0 * h);
                let d = form.derivative(&[0.0], 0.0, &c, tau).unwrap();
                assert!((fd - d).abs() < 1e-7 * d.abs().max(1.0), "{form:?} {tau}");
            }
        }
    }

    #[test]
    fn tabulated_interpolation() {
        let tab = TabulatedNonlinearity {
            points: vec![],
            times: vec![0.0, 1.0],
            taus: vec![-1.0, 0.0, 1.0],
            values: vec![-1.0, 0.0, 1.0, -3.0, 0.0, 3.0],
        };
        tab.validate().unwrap();
        let form = NonlinearityForm::Tabulated(tab);
        let c = coeffs(2.0, 0.0, 0.0, 0.0);
        assert!((form.eval(&[0.3], 0.5, &c, 0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((form.derivative(&[0.3], 0.5, &c, 0.5).unwrap() - 2.0).abs() < 1e-15);
        assert!(matches!(form.eval(&[0.3], 0.5, &c, 1.5), Err(Error::Extrapolation(_))));
    }

    #[test]
    fn tabulated_shape_checked() {
        let tab = TabulatedNonlinearity {
            points: vec![0.0, 1.0],
            times: vec![],
            taus: vec![0.0, 1.0],
            values: vec![0.0; 3],
        };
        assert!(tab.validate().is_err());
    }
}
