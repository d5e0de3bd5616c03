use crate::error::{Error, Result};

/// Right-hand side `y' = f(t, y)`, written into the output slice.
pub trait OdeRhs: Fn(f64, &[f64], &mut [f64]) -> Result<()> {}
impl<F: Fn(f64, &[f64], &mut [f64]) -> Result<()>> OdeRhs for F {}

/// Samples of a fixed-step integration, in the direction of integration.
#[derive(Clone, Debug)]
pub struct OdePath {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl OdePath {
    pub fn last(&self) -> &[f64] {
        self.states.last().map(|s| s.as_slice()).unwrap_or(&[])
    }
}

fn rk4_step<F: OdeRhs>(rhs: &F, t: f64, y: &[f64], h: f64, out: &mut [f64]) -> Result<()> {
    let n = y.len();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    rhs(t, y, &mut k1)?;
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k1[i];
    }
    rhs(t + 0.5 * h, &tmp, &mut k2)?;
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k2[i];
    }
    rhs(t + 0.5 * h, &tmp, &mut k3)?;
    for i in 0..n {
        tmp[i] = y[i] + h * k3[i];
    }
    rhs(t + h, &tmp, &mut k4)?;
    for i in 0..n {
        out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(())
}

/// Number of equal steps covering `span` with steps no longer than `step`.
fn step_count(span: (f64, f64), step: f64) -> Result<usize> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::Integration(format!(
            "step must be positive, got {step}"
        )));
    }
    let len = (span.1 - span.0).abs();
    if !len.is_finite() {
        return Err(Error::Integration("non-finite span".into()));
    }
    Ok(((len / step) * (1.0 - 1e-12)).ceil().max(1.0) as usize)
}

/// Classical fixed-step fourth-order Runge–Kutta from `span.0` to `span.1` (either direction).
///
/// The step is shrunk so that an integer number of steps covers the span exactly.
pub fn integrate_ode<F: OdeRhs>(
    rhs: F,
    init: &[f64],
    span: (f64, f64),
    step: f64,
) -> Result<OdePath> {
    let n = step_count(span, step)?;
    let h = (span.1 - span.0) / n as f64;
    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    if init.iter().any(|x| !x.is_finite()) {
        return Err(Error::Divergence { t: span.0 });
    }
    times.push(span.0);
    states.push(init.to_vec());
    let mut y = init.to_vec();
    let mut next = vec![0.0; init.len()];
    for i in 0..n {
        let t = span.0 + i as f64 * h;
        let t_next = if i + 1 == n {
            span.1
        } else {
            span.0 + (i + 1) as f64 * h
        };
        match rk4_step(&rhs, t, &y, h, &mut next) {
            Ok(()) if next.iter().all(|x| x.is_finite()) => {}
            _ => return Err(Error::Divergence { t: t_next }),
        }
        std::mem::swap(&mut y, &mut next);
        times.push(t_next);
        states.push(y.clone());
    }
    Ok(OdePath { times, states })
}

/// A dense integration side stops once the state grows past this multiple of its initial size.
pub const BLOWUP_FACTOR: f64 = 1e6;

/// Dense solution on an interval: RK4 knots with quintic Hermite interpolation through
/// `y`, `y'` and `y''` at each knot, so interpolated values keep two continuous derivatives.
#[derive(Clone, Debug)]
pub struct DensePath {
    times: Vec<f64>,
    values: Vec<Vec<f64>>,
    firsts: Vec<Vec<f64>>,
    seconds: Vec<Vec<f64>>,
}

/// Result of a two-sided dense integration that may have stopped early.
#[derive(Clone, Debug)]
pub struct DenseOutcome {
    pub path: DensePath,
    /// Interval actually covered, a sub-interval of the request containing the base point.
    pub valid: (f64, f64),
    /// Blow-up times on the low and high sides, when integration stopped early.
    pub blowup: (Option<f64>, Option<f64>),
}

impl DensePath {
    /// Integrate from `(t0, y0)` outwards to both ends of `[lo, hi]`.
    ///
    /// Fails only if the first step on either side already diverges; otherwise a divergence
    /// truncates that side and is reported in the outcome.
    pub fn integrate<F: OdeRhs>(
        rhs: F,
        t0: f64,
        y0: &[f64],
        lo: f64,
        hi: f64,
        step: f64,
    ) -> Result<DenseOutcome> {
        if !(lo <= t0 && t0 <= hi) {
            return Err(Error::Integration(format!(
                "base point {t0} outside [{lo}, {hi}]"
            )));
        }
        let (down, down_blow) = Self::one_side(&rhs, t0, y0, lo, step)?;
        let (up, up_blow) = Self::one_side(&rhs, t0, y0, hi, step)?;
        let mut times = Vec::new();
        let mut values = Vec::new();
        for i in (1..down.times.len()).rev() {
            times.push(down.times[i]);
            values.push(down.states[i].clone());
        }
        times.extend_from_slice(&up.times);
        values.extend(up.states.iter().cloned());
        let mut firsts = Vec::with_capacity(times.len());
        let mut seconds = Vec::with_capacity(times.len());
        let n = y0.len();
        for (t, y) in times.iter().zip(&values) {
            let mut d1 = vec![0.0; n];
            rhs(*t, y, &mut d1)?;
            seconds.push(Self::second_derivative(&rhs, *t, y, &d1)?);
            firsts.push(d1);
        }
        let valid = (times[0], *times.last().unwrap_or(&t0));
        Ok(DenseOutcome {
            path: DensePath {
                times,
                values,
                firsts,
                seconds,
            },
            valid,
            blowup: (down_blow, up_blow),
        })
    }

    fn one_side<F: OdeRhs>(
        rhs: &F,
        t0: f64,
        y0: &[f64],
        end: f64,
        step: f64,
    ) -> Result<(OdePath, Option<f64>)> {
        if end == t0 {
            return Ok((
                OdePath {
                    times: vec![t0],
                    states: vec![y0.to_vec()],
                },
                None,
            ));
        }
        let n = step_count((t0, end), step)?;
        let h = (end - t0) / n as f64;
        let mut times = vec![t0];
        let mut states = vec![y0.to_vec()];
        let mut y = y0.to_vec();
        let mut next = vec![0.0; y0.len()];
        let bound = BLOWUP_FACTOR * y0.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        for i in 0..n {
            let t = t0 + i as f64 * h;
            let t_next = if i + 1 == n {
                end
            } else {
                t0 + (i + 1) as f64 * h
            };
            let ok = rk4_step(rhs, t, &y, h, &mut next).is_ok()
                && next.iter().all(|x| x.is_finite() && x.abs() < bound);
            if !ok {
                if i == 0 {
                    return Err(Error::Divergence { t: t_next });
                }
                return Ok((OdePath { times, states }, Some(t_next)));
            }
            std::mem::swap(&mut y, &mut next);
            times.push(t_next);
            states.push(y.clone());
        }
        Ok((OdePath { times, states }, None))
    }

    /// `y'' = f_t + f_y·f` by a central directional difference of the right-hand side.
    fn second_derivative<F: OdeRhs>(rhs: &F, t: f64, y: &[f64], d1: &[f64]) -> Result<Vec<f64>> {
        let n = y.len();
        let scale = y.iter().fold(t.abs(), |m, x| m.max(x.abs())).max(1.0);
        let eps = 1e-5 * scale;
        let mut yp = vec![0.0; n];
        let mut ym = vec![0.0; n];
        for i in 0..n {
            yp[i] = y[i] + eps * d1[i];
            ym[i] = y[i] - eps * d1[i];
        }
        let mut fp = vec![0.0; n];
        let mut fm = vec![0.0; n];
        rhs(t + eps, &yp, &mut fp)?;
        rhs(t - eps, &ym, &mut fm)?;
        Ok((0..n).map(|i| (fp[i] - fm[i]) / (2.0 * eps)).collect())
    }

    pub fn range(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().unwrap())
    }

    pub fn knots(&self) -> &[f64] {
        &self.times
    }

    pub fn knot_values(&self) -> &[Vec<f64>] {
        &self.values
    }

    /// Interpolated state at `t`; outside the covered range is a domain error.
    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        self.interpolate(t, false)
    }

    /// Derivative of the interpolant at `t`.
    pub fn eval_derivative(&self, t: f64) -> Result<Vec<f64>> {
        self.interpolate(t, true)
    }

    fn interpolate(&self, t: f64, derivative: bool) -> Result<Vec<f64>> {
        let (lo, hi) = self.range();
        let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
        if !(t >= lo - slack && t <= hi + slack) {
            return Err(Error::Domain(format!(
                "t = {t} outside integrated range [{lo}, {hi}]"
            )));
        }
        let n = self.values[0].len();
        if self.times.len() == 1 {
            return Ok(if derivative {
                self.firsts[0].clone()
            } else {
                self.values[0].clone()
            });
        }
        let k = match self.times.partition_point(|&x| x <= t) {
            0 => 0,
            p => (p - 1).min(self.times.len() - 2),
        };
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let s4 = s3 * s;
        let s5 = s4 * s;
        let b = if derivative {
            [
                (-30.0 * s2 + 60.0 * s3 - 30.0 * s4) / h,
                (1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4) / h,
                0.5 * (2.0 * s - 9.0 * s2 + 12.0 * s3 - 5.0 * s4) / h,
                0.5 * (3.0 * s2 - 8.0 * s3 + 5.0 * s4) / h,
                (-12.0 * s2 + 28.0 * s3 - 15.0 * s4) / h,
                (30.0 * s2 - 60.0 * s3 + 30.0 * s4) / h,
            ]
        } else {
            [
                1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5,
                s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5,
                0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5),
                0.5 * (s3 - 2.0 * s4 + s5),
                -4.0 * s3 + 7.0 * s4 - 3.0 * s5,
                10.0 * s3 - 15.0 * s4 + 6.0 * s5,
            ]
        };
        let (y0, y1) = (&self.values[k], &self.values[k + 1]);
        let (d0, d1) = (&self.firsts[k], &self.firsts[k + 1]);
        let (a0, a1) = (&self.seconds[k], &self.seconds[k + 1]);
        Ok((0..n)
            .map(|i| {
                b[0] * y0[i]
                    + b[1] * h * d0[i]
                    + b[2] * h * h * a0[i]
                    + b[3] * h * h * a1[i]
                    + b[4] * h * d1[i]
                    + b[5] * y1[i]
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_rhs(_t: f64, y: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = y[0];
        Ok(())
    }

    #[test]
    fn exponential_growth() {
        let p = integrate_ode(exp_rhs, &[1.0], (0.0, 1.0), 1e-3).unwrap();
        assert!((p.last()[0] - std::f64::consts::E).abs() < 1e-8);
        assert_eq!(*p.times.last().unwrap(), 1.0);
    }

    #[test]
    fn interpolant_derivative_matches_rhs() {
        let out = DensePath::integrate(exp_rhs, 0.0, &[1.0], -0.5, 0.5, 1e-2).unwrap();
        for t in [-0.437, 0.0, 0.123, 0.5] {
            let d = out.path.eval_derivative(t).unwrap()[0];
            assert!((d - t.exp()).abs() < 1e-9, "{t}: {d}");
        }
    }

    #[test]
    fn zero_rhs_is_constant() {
        let p = integrate_ode(
            |_t: f64, _y: &[f64], o: &mut [f64]| {
                o.fill(0.0);
                Ok(())
            },
            &[2.0, -1.0],
            (0.0, 3.0),
            0.1,
        )
        .unwrap();
        assert!(p.states.iter().all(|s| s == &vec![2.0, -1.0]));
    }

    #[test]
    fn fourth_order_convergence() {
        let err = |h: f64| {
            let p = integrate_ode(exp_rhs, &[1.0], (0.0, 1.0), h).unwrap();
            (p.last()[0] - std::f64::consts::E).abs()
        };
        let order = (err(0.02) / err(0.01)).log2();
        assert!(order > 3.9, "order {order}");
    }

    #[test]
    fn blowup_reports_time() {
        let r = integrate_ode(
            |_t: f64, y: &[f64], o: &mut [f64]| {
                o[0] = y[0] * y[0];
                Ok(())
            },
            &[1.0],
            (0.0, 2.0),
            1e-3,
        );
        match r {
            Err(Error::Divergence { t }) => assert!(t > 0.9 && t <= 2.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dense_path_interpolates_smoothly() {
        let out = DensePath::integrate(
            |t: f64, _y: &[f64], o: &mut [f64]| {
                o[0] = t.cos();
                Ok(())
            },
            0.2,
            &[0.2f64.sin()],
            -1.0,
            1.0,
            1e-2,
        )
        .unwrap();
        assert_eq!(out.valid, (-1.0, 1.0));
        for i in 0..=200 {
            let t = -1.0 + i as f64 * 0.01003;
            if t > 1.0 {
                break;
            }
            let y = out.path.eval(t).unwrap()[0];
            assert!((y - t.sin()).abs() < 1e-9, "t={t}");
        }
        assert!(out.path.eval(1.5).is_err());
    }

    #[test]
    fn dense_path_truncates_at_blowup() {
        let out = DensePath::integrate(
            |_t: f64, y: &[f64], o: &mut [f64]| {
                o[0] = y[0] * y[0];
                Ok(())
            },
            0.0,
            &[1.0],
            -1.0,
            2.0,
            1e-3,
        )
        .unwrap();
        assert_eq!(out.valid.0, -1.0);
        assert!(out.valid.1 > 0.9 && out.valid.1 < 1.1);
        assert!(out.blowup.1.is_some());
    }
}
