use crate::model::SystemParams;

use super::{nudge_down, nudge_up, Interval, ModeEvaluation};

/// Feasible CPU frequencies under the deadline, output-energy window and
/// hardware cap; `None` when the window is empty.
///
/// End points are rounded inward so delay and energy at either end satisfy
/// the constraints exactly in floating point.
pub fn mobile_interval(params: &SystemParams) -> Option<Interval> {
    let kw = params.kappa * params.workload;
    let energy = |f: f64| kw * f * f;

    let f_energy_floor = nudge_up((params.e_min / kw).sqrt(), |f| energy(f) >= params.e_min);
    let f_deadline = nudge_up(params.workload / params.tau_d, |f| params.workload / f <= params.tau_d);
    let f_energy_cap = nudge_down((params.e_max / kw).sqrt(), |f| energy(f) <= params.e_max);

    let lower = f_energy_floor.max(f_deadline);
    let upper = f_energy_cap.min(params.f_max);
    (lower <= upper).then_some(Interval { lower, upper })
}

/// Unconstrained minimiser `(V / (-2 B~ kappa))^(1/3)` of the local objective;
/// only meaningful for a negative queue.
pub fn mobile_stationary_point(b_tilde: f64, params: &SystemParams) -> f64 {
    (params.v / (-2.0 * b_tilde * params.kappa)).cbrt()
}

/// `-B~ kappa W f^2 + V W / f`.
pub fn mobile_objective(f: f64, b_tilde: f64, params: &SystemParams) -> f64 {
    -b_tilde * params.kappa * params.workload * f * f + params.v * params.workload / f
}

/// Optimal local frequency for the current queue backlog.
pub fn solve_mobile(b_tilde: f64, params: &SystemParams) -> ModeEvaluation {
    let Some(interval) = mobile_interval(params) else {
        return ModeEvaluation::infeasible();
    };
    let f = if b_tilde >= 0.0 {
        interval.upper
    } else {
        let f0 = mobile_stationary_point(b_tilde, params);
        interval.clamp(f0)
    };
    let delay = params.workload / f;
    let energy = params.kappa * params.workload * f * f;
    ModeEvaluation {
        feasible: true,
        objective: mobile_objective(f, b_tilde, params),
        action: f,
        delay,
        energy,
        interval: Some(interval),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_interval() {
        let p = SystemParams::baseline();
        let iv = mobile_interval(&p).unwrap();
        // sqrt(2e-5 / 7.375e-23)
        assert!((iv.lower - 5.207_556e8).abs() / 5.2e8 < 1e-6, "{}", iv.lower);
        assert_eq!(iv.upper, 1.5e9);
        let kw = p.kappa * p.workload;
        assert!(kw * iv.lower * iv.lower >= p.e_min);
        assert!(p.workload / iv.lower <= p.tau_d);
    }

    #[test]
    fn positive_queue_runs_flat_out() {
        let p = SystemParams::baseline();
        let m = solve_mobile(1e-3, &p);
        assert!(m.feasible);
        assert_eq!(m.action, 1.5e9);
        assert_eq!(solve_mobile(0.0, &p).action, 1.5e9);
    }

    #[test]
    fn stationary_point_below_interval_clamps_to_lower() {
        let p = SystemParams::baseline().with_control(1e-4, 2e-5);
        let f0 = mobile_stationary_point(-0.01, &p);
        assert!((f0 - 3.684_031e8).abs() / 3.684e8 < 1e-6, "{f0}");
        let m = solve_mobile(-0.01, &p);
        assert_eq!(m.action, mobile_interval(&p).unwrap().lower);
    }

    #[test]
    fn interior_optimum_is_stationary() {
        let p = SystemParams::baseline();
        // f0 = 1e9 at B~ = -V / (2 kappa 1e27)
        let b_tilde = -p.v / (2.0 * p.kappa * 1e27);
        let m = solve_mobile(b_tilde, &p);
        assert!((m.action - 1e9).abs() / 1e9 < 1e-12);
    }

    #[test]
    fn high_e_min_makes_local_execution_infeasible() {
        let p = SystemParams::baseline().with_control(1.6e-4, 2e-4);
        assert!(mobile_interval(&p).is_none());
        assert!(!solve_mobile(-0.001, &p).feasible);
    }
}
