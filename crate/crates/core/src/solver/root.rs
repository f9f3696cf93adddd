use serde::{Deserialize, Serialize};

/// Tolerances of the bisection engine shared by the offloading subproblem and
/// the greedy baselines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RootFindConfig {
    /// Stop once the bracket is narrower than this (units of the unknown).
    pub abs_tol: f64,
    /// ... or narrower than this fraction of its upper end.
    pub rel_tol: f64,
    /// Maximum bisection steps after bracketing.
    pub max_iter: u32,
    /// Geometric factor used to grow the initial bracket.
    pub growth: f64,
    /// Maximum number of growth steps before giving up on a bracket.
    pub max_expansions: u32,
}

impl Default for RootFindConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-12, rel_tol: 1e-14, max_iter: 200, growth: 2.0, max_expansions: 256 }
    }
}

impl RootFindConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err("root-finder tolerances must be positive".into());
        }
        if self.max_iter < 1 || self.max_expansions < 1 {
            return Err("root-finder iteration limits must be at least 1".into());
        }
        if !(self.growth > 1.0) {
            return Err(format!("bracket growth must exceed 1, got {}", self.growth));
        }
        Ok(())
    }
}

/// Which end of the final bracket to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Largest known x with `g(x) < target`.
    Below,
    /// Smallest known x with `g(x) >= target`.
    Above,
    /// Bracket midpoint.
    Nearest,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum RootError {
    #[error("no sign change found after {expansions} bracket expansions")]
    NoBracket { expansions: u32 },
    #[error("bisection did not converge in {iterations} steps (best iterate {best})")]
    NoConvergence { iterations: u32, best: f64 },
}

fn pick(lo: f64, hi: f64, side: Side) -> f64 {
    match side {
        Side::Below => lo,
        Side::Above => hi,
        Side::Nearest => lo + 0.5 * (hi - lo),
    }
}

/// Bisection of an increasing `g` on `[lo, hi]` with `g(lo) < target <= g(hi)`.
pub fn bisect<G: Fn(f64) -> f64>(
    g: G,
    target: f64,
    mut lo: f64,
    mut hi: f64,
    side: Side,
    cfg: &RootFindConfig,
) -> Result<f64, RootError> {
    for _ in 0..cfg.max_iter {
        let width = hi - lo;
        if width <= cfg.abs_tol.max(cfg.rel_tol * hi.abs()) {
            return Ok(pick(lo, hi, side));
        }
        let mid = lo + 0.5 * width;
        if mid <= lo || mid >= hi {
            return Ok(pick(lo, hi, side));
        }
        if g(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(RootError::NoConvergence { iterations: cfg.max_iter, best: pick(lo, hi, side) })
}

/// Solves `g(x) = target` for `g` increasing on `(0, inf)`.
///
/// The bracket is grown geometrically from `guess` (which must be positive)
/// in whichever direction the sign of `g(guess) - target` requires, then
/// refined by [`bisect`].
pub fn monotone_root<G: Fn(f64) -> f64>(
    g: G,
    target: f64,
    guess: f64,
    side: Side,
    cfg: &RootFindConfig,
) -> Result<f64, RootError> {
    debug_assert!(guess > 0.0);
    let (mut lo, mut hi);
    if g(guess) < target {
        lo = guess;
        hi = guess * cfg.growth;
        let mut n = 0;
        while g(hi) < target {
            n += 1;
            if n >= cfg.max_expansions || !hi.is_finite() {
                return Err(RootError::NoBracket { expansions: n });
            }
            lo = hi;
            hi *= cfg.growth;
        }
    } else {
        hi = guess;
        lo = guess / cfg.growth;
        let mut n = 0;
        while g(lo) >= target {
            n += 1;
            if n >= cfg.max_expansions || lo == 0.0 {
                return Err(RootError::NoBracket { expansions: n });
            }
            hi = lo;
            lo /= cfg.growth;
        }
    }
    bisect(g, target, lo, hi, side, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_root() {
        let cfg = RootFindConfig::default();
        for guess in [1e-6, 0.3, 1.0, 7.0, 1e8] {
            let x = monotone_root(|x| x, 1.0, guess, Side::Nearest, &cfg).unwrap();
            assert!((x - 1.0).abs() < 1e-12, "guess {guess} -> {x}");
        }
    }

    #[test]
    fn sides_bracket_the_target() {
        let cfg = RootFindConfig::default();
        let g = |x: f64| x * x * x;
        let below = monotone_root(g, 2.0, 1.0, Side::Below, &cfg).unwrap();
        let above = monotone_root(g, 2.0, 1.0, Side::Above, &cfg).unwrap();
        assert!(g(below) < 2.0);
        assert!(g(above) >= 2.0);
        assert!(above - below <= 1e-12);
    }

    #[test]
    fn unreachable_target_reports_no_bracket() {
        let cfg = RootFindConfig { max_expansions: 20, ..RootFindConfig::default() };
        // bounded above by 1
        let g = |x: f64| x / (1.0 + x);
        assert!(matches!(
            monotone_root(g, 2.0, 1.0, Side::Nearest, &cfg),
            Err(RootError::NoBracket { .. })
        ));
        // target below the infimum
        let g = |x: f64| 1.0 + x;
        assert!(matches!(
            monotone_root(g, 0.5, 1.0, Side::Nearest, &cfg),
            Err(RootError::NoBracket { .. })
        ));
    }

    #[test]
    fn iteration_cap_returns_best_iterate() {
        let cfg = RootFindConfig { max_iter: 3, ..RootFindConfig::default() };
        match bisect(|x| x, 0.3, 0.0, 1.0, Side::Below, &cfg) {
            Err(RootError::NoConvergence { best, .. }) => assert!(best < 0.3 && best > 0.1),
            other => panic!("expected convergence error, got {other:?}"),
        }
    }
}
