//! Property-based invariants: chart maps, charge identities, splitting,
//! spectra symmetries, and integrator plumbing over randomly drawn inputs.

use batemanlab::algebra::{charges, default_fd_step, poisson_bracket};
use batemanlab::constraint::{coarse_graining_weight, split};
use batemanlab::dynamics::{analytic_xy, eom_rot, eom_xy, integrate, IntegratorSpec, Method};
use batemanlab::phase::{
    from_hyperbolic, from_rotated, to_hyperbolic, to_rotated, BatemanParams, CanonicalState,
    PhaseStateRot, PhaseStateXY,
};
use batemanlab::spectra::{isotonic_levels, sw_spectrum, IsotonicParams};
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

prop_compose! {
    /// Underdamped parameters: the damping fraction stays below 0.9 of the
    /// critical value, so `omega` is always real.
    fn arb_params()(m in 0.3f64..3.0, kappa in 0.5f64..4.0, d in 0.0f64..0.9) -> BatemanParams {
        BatemanParams::new(m, d * 2.0 * (m * kappa).sqrt(), kappa).unwrap()
    }
}

prop_compose! {
    fn arb_xy()(
        x in -3.0f64..3.0,
        y in -3.0f64..3.0,
        p_x in -3.0f64..3.0,
        p_y in -3.0f64..3.0,
    ) -> PhaseStateXY {
        PhaseStateXY { x, y, p_x, p_y }
    }
}

prop_compose! {
    fn arb_rot()(
        x1 in -3.0f64..3.0,
        x2 in -3.0f64..3.0,
        p1 in -3.0f64..3.0,
        p2 in -3.0f64..3.0,
    ) -> PhaseStateRot {
        PhaseStateRot { x1, x2, p1, p2 }
    }
}

prop_compose! {
    /// A state strictly inside the wedge `x1^2 > x2^2`, with enough margin
    /// for finite-difference displacements.
    fn arb_wedge()(
        mag in 0.6f64..3.0,
        neg in any::<bool>(),
        frac in -0.8f64..0.8,
        p1 in -3.0f64..3.0,
        p2 in -3.0f64..3.0,
    ) -> PhaseStateRot {
        let x1 = if neg { -mag } else { mag };
        PhaseStateRot { x1, x2: x1 * frac, p1, p2 }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rotated_chart_round_trips(s in arb_xy()) {
        let back = from_rotated(&to_rotated(&s));
        let (a, b) = (s.to_array(), back.to_array());
        for c in 0..4 {
            prop_assert!(close(a[c], b[c], 1e-12), "component {c}: {} vs {}", a[c], b[c]);
        }
    }

    #[test]
    fn hyperbolic_chart_round_trips(s in arb_wedge()) {
        let back = from_hyperbolic(&to_hyperbolic(&s).unwrap()).unwrap();
        let (a, b) = (s.to_array(), back.to_array());
        for c in 0..4 {
            prop_assert!(close(a[c], b[c], 1e-10), "component {c}: {} vs {}", a[c], b[c]);
        }
    }

    #[test]
    fn charge_identities_hold_everywhere(p in arb_params(), s in arb_rot()) {
        let ch = charges(&p, &s);
        let casimir = ch.j3 * ch.j3 - ch.j2 * ch.j2 - ch.j1 * ch.j1;
        prop_assert!(
            close(ch.c * ch.c, casimir, 1e-12),
            "C^2 = {} vs J3^2-J2^2-J1^2 = {casimir}",
            ch.c * ch.c
        );
        let combo = 2.0 * (p.omega() * ch.c - p.big_gamma() * ch.j2);
        prop_assert!(close(ch.h, combo, 1e-12), "H = {} vs {combo}", ch.h);
    }

    #[test]
    fn hyperbolic_map_is_canonical(s in arb_wedge()) {
        let step = default_fd_step();
        let r = |t: &PhaseStateRot| to_hyperbolic(t).unwrap().r;
        let u = |t: &PhaseStateRot| to_hyperbolic(t).unwrap().u;
        let p_r = |t: &PhaseStateRot| to_hyperbolic(t).unwrap().p_r;
        let p_u = |t: &PhaseStateRot| to_hyperbolic(t).unwrap().p_u;
        for (name, value, want) in [
            ("{r,p_r}", poisson_bracket(r, p_r, &s, step), 1.0),
            ("{u,p_u}", poisson_bracket(u, p_u, &s, step), 1.0),
            ("{r,u}", poisson_bracket(r, u, &s, step), 0.0),
            ("{r,p_u}", poisson_bracket(r, p_u, &s, step), 0.0),
            ("{u,p_r}", poisson_bracket(u, p_r, &s, step), 0.0),
            ("{p_r,p_u}", poisson_bracket(p_r, p_u, &s, step), 0.0),
        ] {
            prop_assert!((value - want).abs() < 1e-6, "{name} = {value}, want {want}");
        }
    }

    #[test]
    fn equations_of_motion_are_linear(p in arb_params(), s1 in arb_xy(), s2 in arb_xy()) {
        let summed = PhaseStateXY::from_array({
            let (a, b) = (s1.to_array(), s2.to_array());
            [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
        });
        let lhs = eom_xy(&p, &summed).to_array();
        let (d1, d2) = (eom_xy(&p, &s1).to_array(), eom_xy(&p, &s2).to_array());
        for c in 0..4 {
            prop_assert!(close(lhs[c], d1[c] + d2[c], 1e-12));
        }

        let rot = to_rotated(&s1);
        let scaled = PhaseStateRot {
            x1: 2.0 * rot.x1,
            x2: 2.0 * rot.x2,
            p1: 2.0 * rot.p1,
            p2: 2.0 * rot.p2,
        };
        let once = eom_rot(&p, &rot).to_array();
        let twice = eom_rot(&p, &scaled).to_array();
        for c in 0..4 {
            prop_assert!(close(twice[c], 2.0 * once[c], 1e-12));
        }
    }

    #[test]
    fn closed_form_flow_composes(
        p in arb_params(),
        s in arb_xy(),
        t1 in 0.0f64..4.0,
        t2 in 0.0f64..4.0,
    ) {
        let direct = analytic_xy(&p, &s, t1 + t2).to_array();
        let staged = analytic_xy(&p, &analytic_xy(&p, &s, t1), t2).to_array();
        for c in 0..4 {
            prop_assert!(
                close(direct[c], staged[c], 1e-9),
                "component {c}: {} vs {}",
                direct[c],
                staged[c]
            );
        }
    }

    #[test]
    fn closed_form_flow_starts_at_the_initial_state(p in arb_params(), s in arb_xy()) {
        let at_zero = analytic_xy(&p, &s, 0.0).to_array();
        let want = s.to_array();
        for c in 0..4 {
            prop_assert!(close(at_zero[c], want[c], 1e-12));
        }
    }

    #[test]
    fn splitting_recombines_and_stays_nonnegative(
        h in -5.0f64..5.0,
        rho in 0.1f64..10.0,
    ) {
        let sr = split(h, rho).unwrap();
        prop_assert!(sr.h_plus >= 0.0 && sr.h_minus >= 0.0);
        prop_assert!(
            close(sr.h_plus - sr.h_minus, h, 1e-12),
            "h+ - h- = {} vs h = {h}",
            sr.h_plus - sr.h_minus
        );
    }

    #[test]
    fn isotonic_ladders_are_strictly_increasing(
        n_coef in 0.5f64..2.0,
        q_coef in 0.5f64..2.0,
        ratio in 0.0f64..3.0,
    ) {
        let params = IsotonicParams::new(n_coef, q_coef, ratio * n_coef).unwrap();
        let res = isotonic_levels(&params, 6);
        for branch in ["-", "+"] {
            let energies: Vec<f64> = res
                .levels
                .iter()
                .filter(|l| l.branch == branch)
                .map(|l| l.energy)
                .collect();
            for w in energies.windows(2) {
                prop_assert!(w[0] < w[1], "branch {branch} not increasing: {w:?}");
            }
        }
    }

    #[test]
    fn two_mode_spectrum_is_even_in_the_coupling(
        mu in -0.24f64..0.24,
        ratio in -1.0f64..1.0,
    ) {
        let plus = sw_spectrum(1.0, 1.3, mu, ratio, 3).unwrap();
        let minus = sw_spectrum(1.0, 1.3, -mu, ratio, 3).unwrap();
        prop_assert_eq!(plus.levels.len(), minus.levels.len());
        for (a, b) in plus.levels.iter().zip(&minus.levels) {
            prop_assert_eq!(a.energy, b.energy, "branch {} n = {}", a.branch, a.n);
            prop_assert_eq!((a.n, a.n_b, a.branch), (b.n, b.n_b, b.branch));
        }
    }

    #[test]
    fn coarse_graining_weight_is_monotone_and_bounded(
        lo_frac in 0.01f64..0.99,
        hi_frac in 0.01f64..0.99,
    ) {
        let e_planck = 2.7;
        let (lo, hi) = if lo_frac <= hi_frac {
            (lo_frac, hi_frac)
        } else {
            (hi_frac, lo_frac)
        };
        let w_lo = coarse_graining_weight(lo * e_planck, e_planck).unwrap();
        let w_hi = coarse_graining_weight(hi * e_planck, e_planck).unwrap();
        prop_assert!((0.0..=1.0).contains(&w_lo));
        prop_assert!((0.0..=1.0).contains(&w_hi));
        prop_assert!(w_lo >= w_hi, "weight must not grow with energy: {w_lo} < {w_hi}");
    }

    #[test]
    fn trajectories_have_ordered_times_and_reach_the_horizon(
        p in arb_params(),
        s in arb_xy(),
        t_end in 0.5f64..2.0,
    ) {
        let spec = IntegratorSpec::new(Method::Rk4, 0.01, t_end).unwrap();
        let traj = integrate(&p, &s, &spec).unwrap();
        for w in traj.times.windows(2) {
            prop_assert!(w[0] < w[1], "times must be strictly increasing");
        }
        prop_assert!(*traj.times.last().unwrap() >= t_end - 0.01);
        prop_assert_eq!(traj.times.len(), traj.states.len());

        let adaptive = IntegratorSpec::new(Method::Rk45, 1e-10, t_end).unwrap();
        let traj = integrate(&p, &s, &adaptive).unwrap();
        prop_assert_eq!(*traj.times.last().unwrap(), t_end, "adaptive run lands on t_end");
    }
}
