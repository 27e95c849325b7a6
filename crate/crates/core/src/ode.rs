//! Runge-Kutta integrators for small autonomous systems.
//!
//! [`Dopri5`] is the adaptive Dormand-Prince 5(4) pair with a PI step-size
//! controller. [`GaussLegendre8`] is the fixed-step four-stage Gauss-Legendre
//! collocation method: implicit, order eight and symplectic, which makes it
//! a useful reference for long energy audits.
//!
//! Vector fields return `None` when evaluated outside their domain; the
//! adaptive driver treats that as a rejected step.

use nalgebra::{Matrix4, Vector4};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("vector field undefined at the initial point t = {0}")]
    InvalidStart(f64),
    #[error("implicit stage equations did not converge at t = {0}")]
    StageNotConverged(f64),
    #[error("vector field left its domain during a fixed step at t = {0}")]
    FieldUndefined(f64),
}

/// How a component enters the error norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErrorScale {
    /// `atol + rtol * max(|y|, |y_new|)`.
    Relative,
    /// `atol + rtol * scale`, for angles and other quantities whose magnitude
    /// carries no meaning.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dopri5Options {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub initial_step: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: u64,
    pub rejected: u64,
    pub evaluations: u64,
}

// Dormand-Prince coefficients; the field is autonomous so the nodes are not
// needed.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// PI controller constants from Hairer, Nørsett & Wanner.
const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

fn axpy<const N: usize>(y: &[f64; N], terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += c * k[i];
        }
    }
    out
}

/// Adaptive Dormand-Prince 5(4) stepper carrying its step size and the
/// first-same-as-last derivative between calls.
#[derive(Debug, Clone)]
pub struct Dopri5<const N: usize> {
    opts: Dopri5Options,
    scales: [ErrorScale; N],
    h: f64,
    err_old: f64,
    k1: Option<[f64; N]>,
    pub stats: StepStats,
}

impl<const N: usize> Dopri5<N> {
    pub fn new(opts: Dopri5Options, scales: [ErrorScale; N]) -> Self {
        Self {
            h: opts.initial_step.min(opts.max_step),
            opts,
            scales,
            err_old: 1e-4,
            k1: None,
            stats: StepStats::default(),
        }
    }

    /// Advances `(t, y)` to exactly `t_end`. After every accepted step
    /// `accept(t, y)` may end the integration early by returning `false`, in
    /// which case `Ok(false)` is returned.
    pub fn advance_to<F>(
        &mut self,
        f: &F,
        t: &mut f64,
        y: &mut [f64; N],
        t_end: f64,
        accept: &mut impl FnMut(f64, &[f64; N]) -> bool,
    ) -> Result<bool, OdeError>
    where
        F: Fn(&[f64; N]) -> Option<[f64; N]>,
    {
        let mut k1 = match self.k1 {
            Some(k) => k,
            None => {
                self.stats.evaluations += 1;
                f(y).ok_or(OdeError::InvalidStart(*t))?
            }
        };
        while *t < t_end {
            let remaining = t_end - *t;
            let last = self.h * (1.0 + 1e-10) >= remaining;
            let h = if last { remaining } else { self.h };
            match self.try_step(f, y, &k1, h) {
                Some((y_new, k7, err)) if err <= 1.0 => {
                    let fac11 = err.powf(EXPO1);
                    let fac = (fac11 / self.err_old.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                    let h_next = (h / fac).min(self.opts.max_step);
                    self.err_old = err.max(1e-4);
                    self.stats.accepted += 1;
                    *t = if last { t_end } else { *t + h };
                    *y = y_new;
                    k1 = k7;
                    // A step clipped to hit `t_end` says little about the
                    // natural step size, so it only updates on full steps.
                    if !last {
                        self.h = h_next;
                    }
                    if !accept(*t, y) {
                        self.k1 = Some(k1);
                        return Ok(false);
                    }
                }
                Some((_, _, err)) => {
                    self.stats.rejected += 1;
                    let fac11 = err.powf(EXPO1);
                    self.h = h / (fac11 / SAFETY).min(1.0 / FAC_MIN);
                }
                None => {
                    self.stats.rejected += 1;
                    self.h = 0.5 * h;
                }
            }
            if *t < t_end && self.h < 1e-14 * t.abs().max(1.0) {
                return Err(OdeError::StepSizeUnderflow { t: *t, h: self.h });
            }
        }
        self.k1 = Some(k1);
        Ok(true)
    }

    /// One trial step; `None` if a stage left the field's domain.
    fn try_step<F>(&mut self, f: &F, y: &[f64; N], k1: &[f64; N], h: f64) -> Option<([f64; N], [f64; N], f64)>
    where
        F: Fn(&[f64; N]) -> Option<[f64; N]>,
    {
        let mut eval = |x: [f64; N]| {
            self.stats.evaluations += 1;
            f(&x)
        };
        let k2 = eval(axpy(y, &[(h * A21, k1)]))?;
        let k3 = eval(axpy(y, &[(h * A31, k1), (h * A32, &k2)]))?;
        let k4 = eval(axpy(y, &[(h * A41, k1), (h * A42, &k2), (h * A43, &k3)]))?;
        let k5 = eval(axpy(
            y,
            &[(h * A51, k1), (h * A52, &k2), (h * A53, &k3), (h * A54, &k4)],
        ))?;
        let k6 = eval(axpy(
            y,
            &[
                (h * A61, k1),
                (h * A62, &k2),
                (h * A63, &k3),
                (h * A64, &k4),
                (h * A65, &k5),
            ],
        ))?;
        let y_new = axpy(
            y,
            &[
                (h * A71, k1),
                (h * A73, &k3),
                (h * A74, &k4),
                (h * A75, &k5),
                (h * A76, &k6),
            ],
        );
        let k7 = eval(y_new)?;
        let mut sum = 0.0;
        for i in 0..N {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let magnitude = match self.scales[i] {
                ErrorScale::Relative => y[i].abs().max(y_new[i].abs()),
                ErrorScale::Fixed(s) => s,
            };
            let sc = self.opts.atol + self.opts.rtol * magnitude;
            sum += (e / sc).powi(2);
        }
        let err = (sum / N as f64).sqrt();
        Some((y_new, k7, err))
    }
}

/// Four-stage Gauss-Legendre collocation.
#[derive(Debug, Clone)]
pub struct GaussLegendre8 {
    a: Matrix4<f64>,
    b: Vector4<f64>,
}

impl Default for GaussLegendre8 {
    fn default() -> Self {
        Self::new()
    }
}

impl GaussLegendre8 {
    pub fn new() -> Self {
        // Nodes: roots of the shifted Legendre polynomial of degree four.
        let r = (6.0f64 / 5.0).sqrt() * 2.0 / 7.0;
        let inner = (3.0 / 7.0 - r).sqrt();
        let outer = (3.0 / 7.0 + r).sqrt();
        let c = [
            0.5 - 0.5 * outer,
            0.5 - 0.5 * inner,
            0.5 + 0.5 * inner,
            0.5 + 0.5 * outer,
        ];
        // Collocation conditions: Σ_j a_ij c_j^(k-1) = c_i^k / k, Σ_j b_j c_j^(k-1) = 1/k.
        let v = Matrix4::from_fn(|k, j| c[j].powi(k as i32));
        let lu = v.lu();
        let b = lu
            .solve(&Vector4::from_fn(|k, _| 1.0 / (k + 1) as f64))
            .expect("Vandermonde matrix of distinct nodes is invertible");
        let mut a = Matrix4::zeros();
        for i in 0..4 {
            let rhs = Vector4::from_fn(|k, _| c[i].powi(k as i32 + 1) / (k + 1) as f64);
            let row = lu.solve(&rhs).expect("invertible");
            for j in 0..4 {
                a[(i, j)] = row[j];
            }
        }
        Self { a, b }
    }

    /// One step of size `h`, solving the stage equations by fixed-point
    /// iteration.
    pub fn step<F, const N: usize>(&self, f: &F, y: &[f64; N], h: f64) -> Result<[f64; N], OdeError>
    where
        F: Fn(&[f64; N]) -> Option<[f64; N]>,
    {
        let k0 = f(y).ok_or(OdeError::FieldUndefined(0.0))?;
        let mut k = [k0; 4];
        for _ in 0..100 {
            let mut next = [[0.0; N]; 4];
            let mut change = 0.0f64;
            let mut size = 0.0f64;
            for i in 0..4 {
                let mut stage = *y;
                for j in 0..4 {
                    for m in 0..N {
                        stage[m] += h * self.a[(i, j)] * k[j][m];
                    }
                }
                next[i] = f(&stage).ok_or(OdeError::FieldUndefined(0.0))?;
                for m in 0..N {
                    change = change.max((next[i][m] - k[i][m]).abs());
                    size = size.max(next[i][m].abs());
                }
            }
            k = next;
            if change <= 1e-15 * size.max(1e-300) {
                let mut out = *y;
                for j in 0..4 {
                    for m in 0..N {
                        out[m] += h * self.b[j] * k[j][m];
                    }
                }
                return Ok(out);
            }
        }
        Err(OdeError::StageNotConverged(0.0))
    }
}
