//! Truss configuration, identifiers and topology.
//!
//! Nodes are identified by `(level, ordinal)`: level 1 is the apex, level
//! `N + 1` holds the supports. Inclined member `(n, p)` leaves node
//! `(n, ⌈p/2⌉)` downward; horizontal member `(n, q)` ties the sibling nodes
//! `(n, 2q − 1)` and `(n, 2q)`. Horizontal members on the support level
//! carry no force and are not generated.
//!
//! Physical coordinates put support 1 at the origin with `x` to the right
//! and `y` upward. The base spans `W = 2Y c / s`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result, ValidationError};
use crate::fractal::{RatioKind, RatioSequence};

pub const MIN_LEVELS: usize = 2;
/// Keeps every grid point inside the exact dyadic range.
pub const MAX_LEVELS: usize = 24;

/// Inclination `β` of the inclined members, stored through its tangent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inclination {
    tan: f64,
    sin: f64,
    cos: f64,
}

impl Inclination {
    pub fn from_tan(tan: f64) -> Result<Self> {
        if !(tan.is_finite() && tan > 0.0) {
            return Err(Error::Domain(format!("tan(beta) must be finite and > 0, got {tan}")));
        }
        let h = libm::sqrt(1.0 + tan * tan);
        Ok(Self {
            tan,
            sin: tan / h,
            cos: 1.0 / h,
        })
    }

    pub fn from_radians(beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0 && beta < core::f64::consts::FRAC_PI_2) {
            return Err(Error::Domain(format!("beta must lie in (0, pi/2), got {beta}")));
        }
        let (sin, cos) = (libm::sin(beta), libm::cos(beta));
        Ok(Self {
            tan: sin / cos,
            sin,
            cos,
        })
    }

    pub fn tan(&self) -> f64 {
        self.tan
    }

    pub fn sin(&self) -> f64 {
        self.sin
    }

    pub fn cos(&self) -> f64 {
        self.cos
    }

    /// `c / s`.
    pub fn cot(&self) -> f64 {
        1.0 / self.tan
    }

    pub fn radians(&self) -> f64 {
        libm::atan(self.tan)
    }
}

/// Cross-section area (mm²) and Young's modulus (kN/mm²) of a reference
/// member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Section {
    pub area: f64,
    pub modulus: f64,
}

impl Section {
    pub fn new(area: f64, modulus: f64) -> Self {
        Self { area, modulus }
    }

    /// `A·E` in kN.
    pub fn rigidity(&self) -> f64 {
        self.area * self.modulus
    }
}

/// Two prescribed support settlements per unit height, `δ_{z1} = d1` and
/// `δ_{z2} = d2`, with 1-based support ids `z1 < z2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Boundary {
    pub z1: usize,
    pub z2: usize,
    pub d1: f64,
    pub d2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructureConfig {
    pub levels: usize,
    pub inclination: Inclination,
    /// Height `Y`, mm.
    pub height: f64,
    /// Downward apex load `F`, kN.
    pub load: f64,
    /// Level-1 inclined section.
    pub inclined: Section,
    /// Level-2 horizontal section.
    pub horizontal: Section,
    /// `ρ^I_1..ρ^I_N`.
    pub ratios_inclined: RatioSequence,
    /// `ρ^H_2..ρ^H_N`, optionally extended.
    pub ratios_horizontal: RatioSequence,
    pub boundary: Boundary,
}

impl StructureConfig {
    pub fn support_count(&self) -> usize {
        support_count(self.levels)
    }

    pub fn node_count(&self) -> usize {
        3 << (self.levels - 1)
    }

    pub fn member_count(&self) -> usize {
        5 * (1 << (self.levels - 1)) - 3
    }

    /// Base width `W = 2Y c / s`.
    pub fn base_width(&self) -> f64 {
        2.0 * self.height * self.inclination.cot()
    }

    /// Checks every invariant and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut errors = ValidationError::default();
        let n = self.levels;
        if n < MIN_LEVELS {
            errors.push("levels", format!("levels must be >= {MIN_LEVELS}, got {n}"));
        } else if n > MAX_LEVELS {
            errors.push("levels", format!("levels must be <= {MAX_LEVELS}, got {n}"));
        }
        positive(&mut errors, "height", self.height);
        positive(&mut errors, "load", self.load);
        positive(&mut errors, "area_inclined", self.inclined.area);
        positive(&mut errors, "modulus_inclined", self.inclined.modulus);
        positive(&mut errors, "area_horizontal", self.horizontal.area);
        positive(&mut errors, "modulus_horizontal", self.horizontal.modulus);
        let t = self.inclination.tan();
        if !(t.is_finite() && t > 0.0) {
            errors.push("beta", "inclination must lie strictly between 0 and pi/2");
        }

        check_ratios(
            &mut errors,
            &self.ratios_inclined,
            RatioKind::Inclined,
            n,
            "ratios_inclined",
        );
        check_ratios(
            &mut errors,
            &self.ratios_horizontal,
            RatioKind::Horizontal,
            n.saturating_sub(1),
            "ratios_horizontal",
        );

        let b = &self.boundary;
        if (MIN_LEVELS..=MAX_LEVELS).contains(&n) {
            let supports = support_count(n);
            for (field, z) in [("boundary.z1", b.z1), ("boundary.z2", b.z2)] {
                if z < 1 || z > supports {
                    errors.push(field, format!("support id must lie in 1..={supports}, got {z}"));
                }
            }
        }
        if b.z1 >= b.z2 {
            errors.push(
                "boundary.z2",
                format!("z1 < z2 is required, got z1 = {}, z2 = {}", b.z1, b.z2),
            );
        }
        for (field, d) in [("boundary.d1", b.d1), ("boundary.d2", b.d2)] {
            if !d.is_finite() {
                errors.push(field, format!("must be finite, got {d}"));
            }
        }
        errors.into_result()
    }
}

fn positive(errors: &mut ValidationError, field: &str, value: f64) {
    if !(value.is_finite() && value > 0.0) {
        errors.push(field, format!("must be finite and > 0, got {value}"));
    }
}

fn check_ratios(errors: &mut ValidationError, ratios: &RatioSequence, kind: RatioKind, expected: usize, field: &str) {
    if ratios.kind() != kind {
        errors.push(field, format!("expected a {kind:?} sequence"));
    }
    let len = ratios.finite().len();
    if len < expected {
        for k in len..expected {
            errors.push(
                format!("{field}[{k}]"),
                format!(
                    "missing entry (rho_{}); levels = {} needs {expected} ratios",
                    k + kind.first_index(),
                    expected + if kind == RatioKind::Horizontal { 1 } else { 0 }
                ),
            );
        }
    } else if len > expected {
        errors.push(field, format!("expected {expected} ratios, got {len}"));
    }
}

/// Node ids in level-major order, the order of [`Topology::nodes`].
pub fn node_ids(levels: usize) -> impl Iterator<Item = NodeId> {
    (1..=levels)
        .flat_map(|level| (1..=(1usize << (level - 1))).map(move |t| NodeId::new(level, t)))
        .chain((1..=support_count(levels)).map(move |t| NodeId::new(levels + 1, t)))
}

pub fn support_count(levels: usize) -> usize {
    (1 << (levels - 1)) + 1
}

/// Node `(n, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId {
    pub level: usize,
    pub ordinal: usize,
}

impl NodeId {
    pub fn new(level: usize, ordinal: usize) -> Self {
        Self { level, ordinal }
    }

    pub fn apex() -> Self {
        Self::new(1, 1)
    }

    /// Checks the id against a structure of `levels` levels.
    pub fn check(self, levels: usize) -> Result<()> {
        let max_t = if self.level == levels + 1 {
            support_count(levels)
        } else {
            1 << self.level.saturating_sub(1)
        };
        if self.level < 1 || self.level > levels + 1 || self.ordinal < 1 || self.ordinal > max_t {
            return Err(Error::OutOfRange {
                what: "node id",
                detail: format!("({}, {}) in a {levels}-level structure", self.level, self.ordinal),
            });
        }
        Ok(())
    }

    /// Position in the level-major node list.
    pub fn index(self, levels: usize) -> usize {
        if self.level <= levels {
            (1 << (self.level - 1)) - 1 + self.ordinal - 1
        } else {
            (1 << levels) - 1 + self.ordinal - 1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct InclinedId {
    pub level: usize,
    pub position: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HorizontalId {
    pub level: usize,
    pub position: usize,
}

/// Support `i`, 1-based from the left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SupportId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MemberId {
    Inclined(InclinedId),
    Horizontal(HorizontalId),
}

impl MemberId {
    pub fn level(&self) -> usize {
        match self {
            MemberId::Inclined(id) => id.level,
            MemberId::Horizontal(id) => id.level,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub x: f64,
    pub y: f64,
}

/// A pin-ended bar between two node indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Member {
    pub id: MemberId,
    pub start: usize,
    pub end: usize,
    /// mm
    pub length: f64,
    /// `E·A`, kN
    pub rigidity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub id: SupportId,
    pub node: usize,
}

/// Nodes in level-major order, members and supports of one structure.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub levels: usize,
    pub nodes: Vec<Node>,
    pub inclined: Vec<Member>,
    pub horizontal: Vec<Member>,
    pub supports: Vec<Support>,
}

impl Topology {
    pub fn members(&self) -> impl Iterator<Item = &Member> + '_ {
        self.inclined.iter().chain(self.horizontal.iter())
    }

    pub fn member_count(&self) -> usize {
        self.inclined.len() + self.horizontal.len()
    }

    pub fn node_index(&self, id: NodeId) -> Result<usize> {
        id.check(self.levels)?;
        Ok(id.index(self.levels))
    }

    pub fn apex(&self) -> usize {
        0
    }

    /// Members incident on each node.
    pub fn degrees(&self) -> Vec<usize> {
        let mut degree = alloc::vec![0; self.nodes.len()];
        for m in self.members() {
            degree[m.start] += 1;
            degree[m.end] += 1;
        }
        degree
    }
}

/// Normalised abscissa of node `(n, t)` as `numerator / 2^levels`.
pub fn node_abscissa_units(levels: usize, id: NodeId) -> usize {
    if id.level <= levels {
        (2 * id.ordinal - 1) << (levels - id.level)
    } else {
        (id.ordinal - 1) << 1
    }
}

/// Physical position of node `(n, t)` in mm.
pub fn node_position(config: &StructureConfig, level: usize, ordinal: usize) -> Result<(f64, f64)> {
    let id = NodeId::new(level, ordinal);
    id.check(config.levels)?;
    Ok(position_unchecked(config, id))
}

fn position_unchecked(config: &StructureConfig, id: NodeId) -> (f64, f64) {
    let n = config.levels;
    let x_hat = libm::ldexp(node_abscissa_units(n, id) as f64, -(n as i32));
    let y = if id.level <= n {
        libm::ldexp(config.height, -(id.level as i32 - 1))
    } else {
        0.0
    };
    (x_hat * config.base_width(), y)
}

/// Inclined length: `Y/(s 2^n)` for `n < N`, `Y/(s 2^{N−1})` on the last
/// level.
pub fn inclined_length(config: &StructureConfig, level: usize) -> f64 {
    let exp = if level < config.levels {
        level
    } else {
        config.levels - 1
    };
    libm::ldexp(config.height / config.inclination.sin(), -(exp as i32))
}

/// Horizontal length `c Y / (s 2^{n−2})`.
pub fn horizontal_length(config: &StructureConfig, level: usize) -> f64 {
    libm::ldexp(config.height * config.inclination.cot(), -(level as i32 - 2))
}

pub fn build_topology(config: &StructureConfig) -> Result<Topology> {
    config.validate()?;
    let n = config.levels;

    let mut nodes = Vec::with_capacity(config.node_count());
    for level in 1..=n {
        for t in 1..=(1usize << (level - 1)) {
            let id = NodeId::new(level, t);
            let (x, y) = position_unchecked(config, id);
            nodes.push(Node { id, x, y });
        }
    }
    let mut supports = Vec::with_capacity(config.support_count());
    for i in 1..=support_count(n) {
        let id = NodeId::new(n + 1, i);
        let (x, y) = position_unchecked(config, id);
        supports.push(Support {
            id: SupportId(i),
            node: nodes.len(),
        });
        nodes.push(Node { id, x, y });
    }

    let mut inclined = Vec::with_capacity((1 << (n + 1)) - 2);
    for level in 1..=n {
        let length = inclined_length(config, level);
        let rigidity = config.ratios_inclined.element(level - 1)? * config.inclined.rigidity();
        for p in 1..=(1usize << level) {
            let parent = NodeId::new(level, p.div_ceil(2));
            let child = if level < n {
                NodeId::new(level + 1, p)
            } else {
                NodeId::new(n + 1, p / 2 + 1)
            };
            inclined.push(Member {
                id: MemberId::Inclined(InclinedId { level, position: p }),
                start: parent.index(n),
                end: child.index(n),
                length,
                rigidity,
            });
        }
    }

    let mut horizontal = Vec::with_capacity((1 << (n - 1)) - 1);
    for level in 2..=n {
        let length = horizontal_length(config, level);
        let rigidity = config.ratios_horizontal.element(level - 2)? * config.horizontal.rigidity();
        for q in 1..=(1usize << (level - 2)) {
            horizontal.push(Member {
                id: MemberId::Horizontal(HorizontalId { level, position: q }),
                start: NodeId::new(level, 2 * q - 1).index(n),
                end: NodeId::new(level, 2 * q).index(n),
                length,
                rigidity,
            });
        }
    }

    Ok(Topology {
        levels: n,
        nodes,
        inclined,
        horizontal,
        supports,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use alloc::vec;

    /// The worked example: N = 5, tan β = 2, Y = 16000 mm, F = 100 kN.
    pub(crate) fn worked_example() -> StructureConfig {
        StructureConfig {
            levels: 5,
            inclination: Inclination::from_tan(2.0).unwrap(),
            height: 16000.0,
            load: 100.0,
            inclined: Section::new(8.0, 210.0),
            horizontal: Section::new(0.5, 210.0),
            ratios_inclined: RatioSequence::inclined(vec![1.0, 0.5, 0.5, 0.25, 0.25]).unwrap(),
            ratios_horizontal: RatioSequence::horizontal(vec![1.0, 0.75, 0.5, 0.5]).unwrap(),
            boundary: Boundary {
                z1: 1,
                z2: 17,
                d1: -1050.0 / 16000.0,
                d2: -1050.0 / 16000.0,
            },
        }
    }

    fn with_levels(levels: usize) -> StructureConfig {
        let mut c = worked_example();
        c.levels = levels;
        c.ratios_inclined = RatioSequence::inclined(vec![1.0; levels]).unwrap();
        c.ratios_horizontal = RatioSequence::horizontal(vec![1.0; levels - 1]).unwrap();
        c.boundary.z2 = support_count(levels);
        c
    }

    #[test]
    fn worked_example_counts() {
        let topo = build_topology(&worked_example()).unwrap();
        assert_eq!(topo.nodes.len(), 48);
        assert_eq!(topo.member_count(), 77);
        assert_eq!(topo.supports.len(), 17);
    }

    #[test]
    fn two_level_counts() {
        let topo = build_topology(&with_levels(2)).unwrap();
        assert_eq!((topo.nodes.len(), topo.member_count(), topo.supports.len()), (6, 7, 3));
        // apex, two level-2 nodes, three supports; the single horizontal
        // ties (2,1)-(2,2)
        let h = topo.horizontal[0];
        assert_eq!((h.start, h.end), (1, 2));
        let ends: Vec<(usize, usize)> = topo.inclined.iter().map(|m| (m.start, m.end)).collect();
        assert_eq!(ends, vec![(0, 1), (0, 2), (1, 3), (1, 4), (2, 4), (2, 5)]);
    }

    #[test]
    fn counts_follow_formulas() {
        for n in 2..=10 {
            let topo = build_topology(&with_levels(n)).unwrap();
            let half = 1usize << (n - 1);
            assert_eq!(topo.nodes.len(), 3 * half);
            assert_eq!(topo.member_count(), 5 * half - 3);
            assert_eq!(topo.supports.len(), half + 1);
            // hyperstaticity: members + reactions - 2 nodes
            assert_eq!(
                topo.member_count() + 2 * topo.supports.len() - 2 * topo.nodes.len(),
                half - 1
            );
        }
    }

    #[test]
    fn connectivity_degrees() {
        for n in 2..=8 {
            let topo = build_topology(&with_levels(n)).unwrap();
            let degree = topo.degrees();
            let last = support_count(n);
            for (k, node) in topo.nodes.iter().enumerate() {
                let expected = match node.id.level {
                    1 => 2,
                    l if l <= n => 4,
                    _ if node.id.ordinal == 1 || node.id.ordinal == last => 1,
                    _ => 2,
                };
                assert_eq!(degree[k], expected, "node {:?}", node.id);
            }
            // interior nodes: one inclined member from the level above
            for m in &topo.inclined {
                let MemberId::Inclined(id) = m.id else { unreachable!() };
                assert_eq!(topo.nodes[m.start].id.level, id.level);
                assert_eq!(topo.nodes[m.end].id.level, id.level + 1);
            }
        }
    }

    #[test]
    fn lengths_match_positions() {
        for n in 2..=7 {
            let config = with_levels(n);
            let topo = build_topology(&config).unwrap();
            for m in topo.members() {
                let (a, b) = (topo.nodes[m.start], topo.nodes[m.end]);
                let geometric = libm::hypot(b.x - a.x, b.y - a.y);
                assert!((geometric - m.length).abs() <= 1e-9 * m.length, "{:?}", m.id);
            }
        }
    }

    #[test]
    fn worked_example_geometry() {
        let config = worked_example();
        let l1 = inclined_length(&config, 1);
        assert!((l1 - 8944.27191).abs() < 1e-4);
        assert_eq!(node_position(&config, 6, 1).unwrap(), (0.0, 0.0));
        let apex = node_position(&config, 1, 1).unwrap();
        assert!((apex.0 - 8000.0).abs() < 1e-9 && apex.1 == 16000.0);
        let right = node_position(&config, 6, 17).unwrap();
        assert!((right.0 - 16000.0).abs() < 1e-9 && right.1 == 0.0);
        assert!(node_position(&config, 6, 18).is_err());
        assert!(node_position(&config, 2, 3).is_err());
        assert!(node_position(&config, 7, 1).is_err());
    }

    #[test]
    fn rigidities_follow_ratios() {
        let config = worked_example();
        let topo = build_topology(&config).unwrap();
        for m in topo.members() {
            let expected = match m.id {
                MemberId::Inclined(id) => config.ratios_inclined.ratio(id.level).unwrap() * 8.0 * 210.0,
                MemberId::Horizontal(id) => config.ratios_horizontal.ratio(id.level).unwrap() * 0.5 * 210.0,
            };
            assert_eq!(m.rigidity, expected);
        }
    }

    #[test]
    fn apex_to_support_paths_sum_to_height() {
        for n in 2..=8 {
            let config = with_levels(n);
            let topo = build_topology(&config).unwrap();
            // walk down every path of inclined members; each reaches a support
            let mut below = vec![Vec::new(); topo.nodes.len()];
            for m in &topo.inclined {
                below[m.start].push(*m);
            }
            let mut stack = vec![(0usize, 0.0f64)];
            let mut reached = vec![false; topo.nodes.len()];
            while let Some((node, drop)) = stack.pop() {
                if below[node].is_empty() {
                    assert!((drop - config.height).abs() <= 1e-9 * config.height);
                    reached[node] = true;
                }
                for m in &below[node] {
                    let dy = topo.nodes[m.start].y - topo.nodes[m.end].y;
                    assert!((dy - m.length * config.inclination.sin()).abs() <= 1e-9 * m.length);
                    stack.push((m.end, drop + dy));
                }
            }
            assert!(topo.supports.iter().all(|s| reached[s.node]));
        }
    }

    #[test]
    fn supports_equally_spaced() {
        let config = worked_example();
        let topo = build_topology(&config).unwrap();
        let spacing = config.base_width() / 16.0;
        for pair in topo.supports.windows(2) {
            let dx = topo.nodes[pair[1].node].x - topo.nodes[pair[0].node].x;
            assert_eq!(dx, spacing);
        }
        let xs: Vec<f64> = topo.nodes.iter().map(|n| n.x).collect();
        let ys: Vec<f64> = topo.nodes.iter().map(|n| n.y).collect();
        let width = xs.iter().cloned().fold(f64::MIN, f64::max) - xs.iter().cloned().fold(f64::MAX, f64::min);
        let height = ys.iter().cloned().fold(f64::MIN, f64::max);
        assert_eq!(width, config.base_width());
        assert_eq!(height, config.height);
    }

    #[test]
    fn validation_lists_every_issue() {
        let mut c = worked_example();
        c.levels = 1;
        c.load = 0.0;
        c.boundary.z1 = 3;
        c.boundary.z2 = 3;
        let Err(Error::Validation(v)) = c.validate() else {
            panic!()
        };
        let fields: Vec<&str> = v.issues.iter().map(|i| i.field.as_str()).collect();
        assert!(fields.contains(&"levels"));
        assert!(fields.contains(&"load"));
        assert!(fields.contains(&"boundary.z2"));
        assert!(v.issues[0].message.contains("levels must be >= 2"));

        let mut c = worked_example();
        c.ratios_horizontal = RatioSequence::horizontal(vec![1.0, 0.75, 0.5]).unwrap();
        let Err(Error::Validation(v)) = c.validate() else {
            panic!()
        };
        assert_eq!(v.issues[0].field, "ratios_horizontal[3]");

        let mut c = worked_example();
        c.boundary.z2 = 18;
        assert!(build_topology(&c).is_err());
    }

    #[test]
    fn inclination_conversions() {
        let a = Inclination::from_tan(2.0).unwrap();
        assert!((a.sin() - 2.0 / libm::sqrt(5.0)).abs() < 1e-15);
        assert_eq!(a.cot(), 0.5);
        let b = Inclination::from_radians(a.radians()).unwrap();
        assert!((b.tan() - 2.0).abs() < 1e-14);
        assert!(Inclination::from_radians(0.0).is_err());
        assert!(Inclination::from_radians(core::f64::consts::FRAC_PI_2).is_err());
        assert!(Inclination::from_tan(-1.0).is_err());
    }
}
