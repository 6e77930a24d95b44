//! Explicit adaptive Runge–Kutta integration with the Dormand–Prince 5(4)
//! embedded pair, rising-edge event location, and dense evaluation.
//!
//! Dense evaluation re-takes a single Dormand–Prince step from the nearest
//! accepted node, so interpolated values carry the same fifth-order local
//! error as the accepted steps themselves.

use crate::error::{Error, Result};

/// Right-hand side of `y' = f(t, y)`.
pub trait OdeSystem<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N]) -> Result<[f64; N]>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// First trial step; a standard heuristic is used when absent.
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: None,
            h_max: f64::INFINITY,
            max_steps: 2_000_000,
        }
    }
}

/// A located zero of an event function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventHit<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    /// Event function value at `t` (ideally zero).
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeSolution<const N: usize> {
    /// Accepted nodes, strictly increasing.
    pub ts: Vec<f64>,
    pub ys: Vec<[f64; N]>,
    /// First rising zero of the event function, if any.
    pub event: Option<EventHit<N>>,
    pub rejected_steps: usize,
}

impl<const N: usize> OdeSolution<N> {
    pub fn t_first(&self) -> f64 {
        self.ts[0]
    }

    pub fn t_last(&self) -> f64 {
        *self.ts.last().expect("solution has at least one node")
    }

    pub fn y_last(&self) -> &[f64; N] {
        self.ys.last().expect("solution has at least one node")
    }

    /// Evaluate the solution at any `t` in its span.
    pub fn eval<S: OdeSystem<N>>(&self, sys: &S, t: f64) -> Result<[f64; N]> {
        let (lo, hi) = (self.t_first(), self.t_last());
        if !(t >= lo && t <= hi) {
            return Err(Error::InvalidInput(format!(
                "evaluation time {t} outside solution span [{lo}, {hi}]"
            )));
        }
        // index of the last node <= t
        let i = self.ts.partition_point(|&s| s <= t).saturating_sub(1);
        let (ti, yi) = (self.ts[i], self.ys[i]);
        if t == ti {
            return Ok(yi);
        }
        let k1 = sys.rhs(ti, &yi)?;
        let trial = dopri_step(sys, ti, &yi, &k1, t - ti)?;
        Ok(trial.y)
    }
}

struct Trial<const N: usize> {
    y: [f64; N],
    err: [f64; N],
    k_last: [f64; N],
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combo<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

fn dopri_step<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
) -> Result<Trial<N>> {
    let k2 = sys.rhs(t + C2 * h, &combo(y, h, &[(A21, k1)]))?;
    let k3 = sys.rhs(t + C3 * h, &combo(y, h, &[(A31, k1), (A32, &k2)]))?;
    let k4 = sys.rhs(
        t + C4 * h,
        &combo(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]),
    )?;
    let k5 = sys.rhs(
        t + C5 * h,
        &combo(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    )?;
    let k6 = sys.rhs(
        t + h,
        &combo(
            y,
            h,
            &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        ),
    )?;
    let y5 = combo(
        y,
        h,
        &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
    );
    let k7 = sys.rhs(t + h, &y5)?;
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    Ok(Trial {
        y: y5,
        err,
        k_last: k7,
    })
}

fn error_norm<const N: usize>(opts: &OdeOptions, y: &[f64; N], trial: &Trial<N>) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let sc = opts.atol + opts.rtol * y[i].abs().max(trial.y[i].abs());
        let r = trial.err[i] / sc;
        acc += r * r;
    }
    (acc / N as f64).sqrt()
}

fn initial_step<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    t: f64,
    y: &[f64; N],
    f0: &[f64; N],
    opts: &OdeOptions,
) -> Result<f64> {
    let scale = |i: usize| opts.atol + opts.rtol * y[i].abs();
    let d0 = (0..N)
        .map(|i| (y[i] / scale(i)).powi(2))
        .sum::<f64>()
        .sqrt();
    let d1 = (0..N)
        .map(|i| (f0[i] / scale(i)).powi(2))
        .sum::<f64>()
        .sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let y1 = combo(y, h0, &[(1.0, f0)]);
    let f1 = sys.rhs(t + h0, &y1)?;
    let d2 = (0..N)
        .map(|i| ((f1[i] - f0[i]) / scale(i)).powi(2))
        .sum::<f64>()
        .sqrt()
        / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Ok((100.0 * h0).min(h1))
}

/// Integrate from `(t0, y0)` to `t_end`.
///
/// `event`, when given, is watched for a rising zero (`g < 0` at one accepted
/// node, `g >= 0` at the next). The zero is refined to `|g| <= event_tol`
/// (either side) or to machine resolution in `t`; with `stop_at_event` the solution ends there.
#[allow(clippy::too_many_arguments)]
pub fn integrate<S, G, const N: usize>(
    sys: &S,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &OdeOptions,
    mut event: Option<G>,
    event_tol: f64,
    stop_at_event: bool,
) -> Result<OdeSolution<N>>
where
    S: OdeSystem<N>,
    G: FnMut(f64, &[f64; N]) -> f64,
{
    if !(t_end >= t0) || !t0.is_finite() || !t_end.is_finite() {
        return Err(Error::InvalidInput(format!(
            "integration interval [{t0}, {t_end}] is invalid"
        )));
    }
    let mut sol = OdeSolution {
        ts: vec![t0],
        ys: vec![y0],
        event: None,
        rejected_steps: 0,
    };
    if t_end == t0 {
        return Ok(sol);
    }
    let mut t = t0;
    let mut y = y0;
    let mut f = sys.rhs(t, &y)?;
    let mut g_prev = event.as_mut().map(|g| g(t, &y));
    let mut h = match opts.h_init {
        Some(h) if h > 0.0 => h,
        _ => initial_step(sys, t, &y, &f, opts)?,
    }
    .min(opts.h_max);
    let mut accepted = 0usize;
    let mut last_rejected = false;

    while t < t_end {
        if accepted >= opts.max_steps {
            return Err(Error::IntegrationFailure {
                at: t,
                reason: format!("exceeded {} steps", opts.max_steps),
            });
        }
        let mut final_step = false;
        if t + h >= t_end {
            h = t_end - t;
            final_step = true;
        }
        if h <= 4.0 * f64::EPSILON * t.abs() || h <= 0.0 || t + h == t {
            return Err(Error::IntegrationFailure {
                at: t,
                reason: format!("step size underflow (h = {h:e})"),
            });
        }
        let trial = match dopri_step(sys, t, &y, &f, h) {
            Ok(tr) if tr.y.iter().all(|v| v.is_finite()) => tr,
            // a stage left the domain of the vector field: shrink and retry
            _ => {
                sol.rejected_steps += 1;
                h *= 0.25;
                last_rejected = true;
                continue;
            }
        };
        let err = error_norm(opts, &y, &trial);
        if !(err <= 1.0) {
            sol.rejected_steps += 1;
            let fac = if err.is_finite() {
                (0.9 * err.powf(-0.2)).clamp(0.1, 0.9)
            } else {
                0.1
            };
            h *= fac;
            last_rejected = true;
            continue;
        }

        let t_new = if final_step { t_end } else { t + h };
        if let (Some(g), Some(gp)) = (event.as_mut(), g_prev) {
            let g_new = g(t_new, &trial.y);
            if gp < 0.0 && g_new >= 0.0 && sol.event.is_none() {
                let hit = locate_event(sys, t, &y, &f, t_new - t, gp, g_new, g, event_tol)?;
                sol.event = Some(hit);
                if stop_at_event {
                    if hit.t > t {
                        sol.ts.push(hit.t);
                        sol.ys.push(hit.y);
                    }
                    return Ok(sol);
                }
            }
            g_prev = Some(g_new);
        }

        t = t_new;
        y = trial.y;
        f = trial.k_last;
        sol.ts.push(t);
        sol.ys.push(y);
        accepted += 1;

        let mut fac = if err == 0.0 {
            5.0
        } else {
            0.9 * err.powf(-0.2)
        };
        fac = fac.clamp(0.2, 5.0);
        if last_rejected {
            fac = fac.min(1.0);
        }
        last_rejected = false;
        h = (h * fac).min(opts.h_max);
    }
    Ok(sol)
}

/// Illinois-modified regula falsi on `h -> g(t + h, step(h))` over `[0, h_acc]`.
#[allow(clippy::too_many_arguments)]
fn locate_event<S, G, const N: usize>(
    sys: &S,
    t: f64,
    y: &[f64; N],
    f: &[f64; N],
    h_acc: f64,
    g_lo: f64,
    g_hi: f64,
    g: &mut G,
    tol: f64,
) -> Result<EventHit<N>>
where
    S: OdeSystem<N>,
    G: FnMut(f64, &[f64; N]) -> f64,
{
    let (mut a, mut fa) = (0.0, g_lo);
    let (mut b, mut fb) = (h_acc, g_hi);
    let mut yb = dopri_step(sys, t, y, f, h_acc)?.y;
    if fb == 0.0 {
        return Ok(EventHit {
            t: t + b,
            y: yb,
            residual: 0.0,
        });
    }
    let mut side = 0i8;
    for _ in 0..400 {
        let width = b - a;
        if width <= 2.0 * f64::EPSILON * (t + b).abs().max(f64::MIN_POSITIVE) {
            break;
        }
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let yc = dopri_step(sys, t, y, f, c)?.y;
        let fc = g(t + c, &yc);
        if fc.abs() <= tol {
            return Ok(EventHit {
                t: t + c,
                y: yc,
                residual: fc,
            });
        }
        if fc >= 0.0 {
            b = c;
            fb = fc;
            yb = yc;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        } else {
            a = c;
            fa = fc;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        }
    }
    // bracket collapsed: b holds the crossing side with g >= 0
    let residual = g(t + b, &yb);
    Ok(EventHit {
        t: t + b,
        y: yb,
        residual,
    })
}
