//! Mono-dimensional fractal impedance channel.
//!
//! Each degree of freedom carries a [`FicChannel`] that tracks whether the
//! error magnitude is growing (divergence) or shrinking (convergence) and
//! remembers the peak displacement reached during the last divergence. During
//! divergence the channel applies the configured [`ForceProfile`]; during
//! convergence it applies a linear spring centred at half the peak, which
//! brings an undamped mass back to zero error with zero velocity.

use crate::NavError;

/// Errors below this magnitude count as a zero crossing.
pub const ZERO_TOL: f64 = 1e-12;

/// Default hysteresis band on `|x̃|` used for phase detection.
pub const DEFAULT_HYSTERESIS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FicPhase {
    Divergence,
    Convergence,
}

/// A bounded, odd, monotone force law `F(x̃)`.
pub trait ForceProfile {
    fn evaluate(&self, err: f64) -> f64;

    /// Upper bound on `|evaluate(x)|`.
    fn saturation(&self) -> f64;
}

impl<P: ForceProfile + ?Sized> ForceProfile for &P {
    fn evaluate(&self, err: f64) -> f64 {
        (**self).evaluate(err)
    }

    fn saturation(&self) -> f64 {
        (**self).saturation()
    }
}

/// Linear spring clipped at `±limit`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturatedSpring {
    pub stiffness: f64,
    pub limit: f64,
}

impl SaturatedSpring {
    pub fn new(stiffness: f64, limit: f64) -> Self {
        Self { stiffness, limit }
    }

    /// An unbounded spring, useful for closed-form checks.
    pub fn linear(stiffness: f64) -> Self {
        Self {
            stiffness,
            limit: f64::INFINITY,
        }
    }
}

impl ForceProfile for SaturatedSpring {
    fn evaluate(&self, err: f64) -> f64 {
        (self.stiffness * err).clamp(-self.limit, self.limit)
    }

    fn saturation(&self) -> f64 {
        self.limit
    }
}

/// Per-DoF phase memory of a fractal impedance controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FicChannel {
    pub phase: FicPhase,
    /// Peak `|x̃|` of the current attractor cycle.
    pub x_max: f64,
    /// Signed error seen on the previous update.
    pub prev_err: f64,
    /// `|x̃|` when the phase was last decided. Growth or shrinkage is measured
    /// from here, so the hysteresis does not depend on the sampling step.
    pub anchor: f64,
    /// Sign of the error when the peak was recorded (+1 or -1).
    pub peak_sign: f64,
    pub hysteresis: f64,
}

impl Default for FicChannel {
    fn default() -> Self {
        Self::new(DEFAULT_HYSTERESIS)
    }
}

impl FicChannel {
    pub fn new(hysteresis: f64) -> Self {
        Self {
            phase: FicPhase::Convergence,
            x_max: 0.0,
            prev_err: 0.0,
            anchor: 0.0,
            peak_sign: 1.0,
            hysteresis: hysteresis.max(0.0),
        }
    }

    pub fn prev_abs_err(&self) -> f64 {
        self.prev_err.abs()
    }

    /// Advance the phase memory with a new error sample.
    pub fn update_phase(&self, err: f64) -> Result<FicChannel, NavError> {
        if !err.is_finite() {
            return Err(NavError::NonFinite {
                what: "fic error sample",
                value: err,
            });
        }
        let mut next = *self;
        let mag = err.abs();
        let prev = self.prev_err;
        let crossed = mag < ZERO_TOL || (prev != 0.0 && err != 0.0 && prev.signum() != err.signum());

        if crossed {
            next.x_max = mag;
            next.phase = FicPhase::Convergence;
            next.peak_sign = sign_or(err, self.peak_sign);
            next.anchor = mag;
        } else if mag > self.anchor + self.hysteresis {
            if self.phase == FicPhase::Convergence {
                // a fresh divergence starts a new cycle
                next.x_max = mag;
            }
            next.phase = FicPhase::Divergence;
            next.anchor = mag;
        } else if mag < self.anchor - self.hysteresis {
            next.phase = FicPhase::Convergence;
            next.anchor = mag;
        }

        if next.phase == FicPhase::Divergence && !crossed {
            if mag >= next.x_max {
                next.peak_sign = sign_or(err, self.peak_sign);
            }
            next.x_max = next.x_max.max(mag);
        } else if mag > next.x_max + next.hysteresis {
            // convergence is only defined inside the recorded peak
            next.x_max = mag;
            next.peak_sign = sign_or(err, self.peak_sign);
        }
        next.prev_err = err;
        Ok(next)
    }

    /// Force of the active branch. The channel must already have been updated
    /// with `err`.
    pub fn force<P: ForceProfile>(&self, profile: &P, err: f64) -> f64 {
        match self.phase {
            FicPhase::Divergence => profile.evaluate(err),
            FicPhase::Convergence => {
                if self.x_max <= 0.0 {
                    return 0.0;
                }
                let peak = profile.evaluate(self.x_max);
                peak / self.x_max * (2.0 * err.abs() - self.x_max) * self.peak_sign
            }
        }
    }

    /// Potential energy held by the active branch at error `err`.
    ///
    /// Divergence stores `∫₀^|x̃| F`. Convergence is the midpoint spring,
    /// offset so it agrees with the divergence integral at `|x̃| = x_max`.
    pub fn stored_energy<P: ForceProfile>(&self, profile: &P, err: f64) -> f64 {
        let mag = err.abs();
        match self.phase {
            FicPhase::Divergence => profile_energy(profile, mag),
            FicPhase::Convergence => {
                if self.x_max <= 0.0 {
                    return profile_energy(profile, mag);
                }
                let peak_force = profile.evaluate(self.x_max).abs();
                let stiffness = peak_force / self.x_max;
                profile_energy(profile, self.x_max) - stiffness * mag * (self.x_max - mag)
            }
        }
    }
}

fn sign_or(value: f64, fallback: f64) -> f64 {
    if value > 0.0 {
        1.0
    } else if value < 0.0 {
        -1.0
    } else {
        fallback
    }
}

/// `∫₀^|x| F(s) ds` by adaptive Simpson quadrature (relative tolerance 1e-9).
pub fn profile_energy<P: ForceProfile>(profile: &P, x: f64) -> f64 {
    let upper = x.abs();
    if upper == 0.0 {
        return 0.0;
    }
    let f = |s: f64| profile.evaluate(s);
    adaptive_simpson(&f, 0.0, upper, 1e-9, 50)
}

/// Adaptive Simpson integration of `f` over `[a, b]`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64, max_depth: u32) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let scale = whole.abs().max(f64::MIN_POSITIVE);
    simpson_step(f, a, b, fa, fm, fb, whole, rel_tol * scale, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}
