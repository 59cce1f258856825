#![allow(dead_code)]

use proptest::prelude::*;
use quasi_sierpinski::closed_form::{support_displacements_unchecked, DimensionlessGroups};
use quasi_sierpinski::fractal::{Extension, RatioSequence};
use quasi_sierpinski::structure::{support_count, Boundary, Inclination, Section, StructureConfig};

/// Shifts `d1`, `d2` by the same amount so that every settlement lies below
/// `-margin`. A common shift moves all of `δ` rigidly.
pub fn make_compressive(config: &mut StructureConfig, margin: f64) {
    let groups = DimensionlessGroups::new(config).unwrap();
    let delta = support_displacements_unchecked(config, &groups).unwrap();
    let top = delta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top > -margin {
        config.boundary.d1 -= top + margin;
        config.boundary.d2 -= top + margin;
    }
}

fn ratios(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.3f64..3.0, len - 1).prop_map(|mut v| {
        v.insert(0, 1.0);
        v
    })
}

/// Admissible configurations with `levels` in the given range. Every
/// settlement lies at least `0.01 Y` below the unloaded position; a support
/// barely moving needs a near-rigid spring and the solve loses digits.
pub fn config(levels: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = StructureConfig> {
    levels.prop_flat_map(|n| {
        let supports = support_count(n);
        (
            (0.25f64..4.0, 1000.0f64..40000.0, 1.0f64..500.0),
            (1.0f64..20.0, 50.0f64..300.0, 0.2f64..10.0, 50.0f64..300.0),
            ratios(n),
            ratios(n - 1),
            (1..supports).prop_flat_map(move |z1| (Just(z1), (z1 + 1)..=supports)),
            (-0.2f64..0.0, -0.2f64..0.0),
        )
            .prop_map(move |(geo, sect, ri, rh, (z1, z2), (d1, d2))| {
                let mut c = StructureConfig {
                    levels: n,
                    inclination: Inclination::from_tan(geo.0).unwrap(),
                    height: geo.1,
                    load: geo.2,
                    inclined: Section::new(sect.0, sect.1),
                    horizontal: Section::new(sect.2, sect.3),
                    ratios_inclined: RatioSequence::inclined(ri).unwrap(),
                    ratios_horizontal: RatioSequence::horizontal(rh).unwrap(),
                    boundary: Boundary { z1, z2, d1, d2 },
                };
                make_compressive(&mut c, 1e-2);
                c
            })
    })
}

/// Admissible extensions of a horizontal ratio list.
pub fn extension() -> impl Strategy<Value = Extension> {
    prop_oneof![
        (0.26f64..3.0, 1u32..4).prop_map(|(ratio, first_exponent)| Extension::GeometricTail { ratio, first_exponent }),
        prop::collection::vec(0.3f64..3.0, 12..16).prop_map(Extension::ExplicitList),
    ]
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

/// `max |a - b| / max |b|`.
pub fn relative_deviation(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let dev = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    if scale > 0.0 {
        dev / scale
    } else {
        dev
    }
}
