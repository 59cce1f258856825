mod common;

use common::{config, relative_deviation};
use proptest::prelude::*;
use quasi_sierpinski::closed_form::{analyze, AnalysisOptions};
use quasi_sierpinski::fem::{compare, solve_apex, Tolerances};
use quasi_sierpinski::fractal::RatioSequence;
use quasi_sierpinski::structure::{build_topology, Boundary, Inclination, Section, StructureConfig};

fn two_levels() -> StructureConfig {
    StructureConfig {
        levels: 2,
        inclination: Inclination::from_tan(1.0).unwrap(),
        height: 1000.0,
        load: 40.0,
        inclined: Section::new(5.0, 200.0),
        horizontal: Section::new(1.0, 200.0),
        ratios_inclined: RatioSequence::inclined(vec![1.0, 1.0]).unwrap(),
        ratios_horizontal: RatioSequence::horizontal(vec![1.0]).unwrap(),
        boundary: Boundary {
            z1: 1,
            z2: 3,
            d1: -0.2,
            d2: -0.2,
        },
    }
}

#[test]
fn base_case_spreads_quarter_half_quarter() {
    let c = two_levels();
    let r = analyze(&c, AnalysisOptions::default()).unwrap();
    let t = build_topology(&c).unwrap();
    let sol = solve_apex(&t, &r.stiffness, c.load).unwrap();
    let v: Vec<f64> = sol.support_reactions.iter().map(|r| r[1]).collect();
    assert!(relative_deviation(&v, &[10.0, 20.0, 10.0]) < 1e-12);
    assert!(sol.support_reactions[1][0].abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn fem_reproduces_closed_form(c in config(2..=8)) {
        let r = analyze(&c, AnalysisOptions::default()).unwrap();
        let t = build_topology(&c).unwrap();
        let sol = solve_apex(&t, &r.stiffness, c.load).unwrap();
        let report = compare(&t, &sol, &r, &Tolerances::default()).unwrap();
        prop_assert!(report.passed, "{}", report);
        prop_assert!(sol.equilibrium_residual <= 1e-9 * c.load);
        let last = t.supports.len() - 1;
        for s in &sol.support_reactions[1..last] {
            prop_assert!(s[0].abs() <= 1e-9 * c.load);
        }
        let thrust = c.load * c.inclination.cot() / 2f64.powi(c.levels as i32);
        prop_assert!((sol.support_reactions[0][0] - thrust).abs() <= 1e-8 * thrust);
        prop_assert!((sol.support_reactions[last][0] + thrust).abs() <= 1e-8 * thrust);
    }

    #[test]
    fn global_equilibrium(c in config(2..=8)) {
        let r = analyze(&c, AnalysisOptions::default()).unwrap();
        let t = build_topology(&c).unwrap();
        let sol = solve_apex(&t, &r.stiffness, c.load).unwrap();
        let f = c.load;
        let sum_v: f64 = sol.support_reactions.iter().map(|r| r[1]).sum();
        let sum_h: f64 = sol.support_reactions.iter().map(|r| r[0]).sum();
        prop_assert!((sum_v - f).abs() <= 1e-9 * f);
        prop_assert!(sum_h.abs() <= 1e-9 * f);
        let x0 = t.nodes[t.supports[0].node].x;
        let moment: f64 = t.supports.iter().zip(&sol.support_reactions).map(|(s, r)| r[1] * (t.nodes[s.node].x - x0)).sum::<f64>()
            - f * (t.nodes[t.apex()].x - x0);
        prop_assert!(moment.abs() <= 1e-9 * f * c.base_width());
        // spring law at every support
        for ((s, k), r) in t.supports.iter().zip(&r.stiffness).zip(&sol.support_reactions) {
            prop_assert_eq!(r[1], -k * sol.displacements[s.node][1]);
        }
    }

    #[test]
    fn response_is_linear(c in config(2..=6), factor in 0.1f64..10.0) {
        let r = analyze(&c, AnalysisOptions::default()).unwrap();
        let t = build_topology(&c).unwrap();
        let base = solve_apex(&t, &r.stiffness, c.load).unwrap();
        // scaling the load, the springs and every EA together changes nothing
        let scaled_k: Vec<f64> = r.stiffness.iter().map(|k| k * factor).collect();
        let mut stiffer = t.clone();
        for m in stiffer.inclined.iter_mut().chain(stiffer.horizontal.iter_mut()) {
            m.rigidity *= factor;
        }
        let both = solve_apex(&stiffer, &scaled_k, c.load * factor).unwrap();
        let load_only = solve_apex(&t, &r.stiffness, c.load * factor).unwrap();
        let flat = |s: &quasi_sierpinski::fem::FemSolution| -> Vec<f64> {
            s.displacements.iter().flat_map(|d| [d[0], d[1]]).collect()
        };
        let b = flat(&base);
        prop_assert!(relative_deviation(&flat(&both), &b) <= 1e-9);
        let scaled: Vec<f64> = b.iter().map(|v| v * factor).collect();
        prop_assert!(relative_deviation(&flat(&load_only), &scaled) <= 1e-9);
    }
}
