//! Direct-stiffness solver for the pin-jointed truss.
//!
//! Every member is a two-force bar. Support nodes are fixed horizontally and
//! rest vertically on grounded springs. Fixed degrees of freedom are removed
//! from the system, not penalised. The reduced stiffness matrix is stored in
//! skyline form with unknowns numbered by abscissa, which keeps the profile
//! narrow for the bifurcating layout.
//!
//! The solver shares nothing with [`crate::closed_form`] beyond the
//! topology, so agreement between the two is a real check.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::closed_form::AnalysisResult;
use crate::error::{Error, Result};
use crate::linalg::SkylineMatrix;
use crate::structure::{Member, MemberId, Node, Topology};

/// Lengths given by the topology may differ from the node distance by this
/// fraction.
const LENGTH_TOLERANCE: f64 = 1e-9;

/// Iterative refinement passes after the direct solve.
const REFINEMENT_STEPS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dof {
    Free(usize),
    Fixed,
}

/// Horizontal and vertical unknown of each node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofMap {
    pub dofs: Vec<[Dof; 2]>,
    pub free: usize,
}

impl DofMap {
    /// Numbers free unknowns node by node in order of increasing `x`, then
    /// `y`. Support nodes lose their horizontal unknown.
    pub fn new(topology: &Topology) -> Self {
        let mut is_support = vec![false; topology.nodes.len()];
        for s in &topology.supports {
            is_support[s.node] = true;
        }
        let mut order: Vec<usize> = (0..topology.nodes.len()).collect();
        order.sort_by(|&a, &b| {
            let (na, nb) = (&topology.nodes[a], &topology.nodes[b]);
            na.x.total_cmp(&nb.x).then(na.y.total_cmp(&nb.y)).then(a.cmp(&b))
        });
        let mut dofs = vec![[Dof::Fixed; 2]; topology.nodes.len()];
        let mut free = 0;
        for k in order {
            if !is_support[k] {
                dofs[k][0] = Dof::Free(free);
                free += 1;
            }
            dofs[k][1] = Dof::Free(free);
            free += 1;
        }
        Self { dofs, free }
    }

    pub fn free_index(&self, node: usize, axis: usize) -> Option<usize> {
        match self.dofs[node][axis] {
            Dof::Free(i) => Some(i),
            Dof::Fixed => None,
        }
    }
}

/// Global 4×4 stiffness of a bar with axial rigidity `ea` and length `length`
/// between `a` and `b`, in the order `(u_a, v_a, u_b, v_b)`.
pub fn bar_stiffness(a: &Node, b: &Node, ea: f64, length: f64) -> [[f64; 4]; 4] {
    let (c, s) = direction(a, b);
    let k = ea / length;
    let block = [[c * c, c * s], [c * s, s * s]];
    let mut out = [[0.0; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            let v = k * block[i][j];
            out[i][j] = v;
            out[i + 2][j + 2] = v;
            out[i][j + 2] = -v;
            out[i + 2][j] = -v;
        }
    }
    out
}

fn direction(a: &Node, b: &Node) -> (f64, f64) {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let l = libm::hypot(dx, dy);
    (dx / l, dy / l)
}

fn member_label(m: &Member) -> String {
    match m.id {
        MemberId::Inclined(id) => format!("inclined ({}, {})", id.level, id.position),
        MemberId::Horizontal(id) => format!("horizontal ({}, {})", id.level, id.position),
    }
}

fn check_member(topology: &Topology, m: &Member) -> Result<()> {
    let label = member_label(m);
    if m.start >= topology.nodes.len() || m.end >= topology.nodes.len() {
        return Err(Error::Assembly(format!("{label}: end node out of range")));
    }
    if !(m.rigidity > 0.0) || !m.rigidity.is_finite() {
        return Err(Error::Assembly(format!(
            "{label}: EA must be positive, got {}",
            m.rigidity
        )));
    }
    if !(m.length > 0.0) || !m.length.is_finite() {
        return Err(Error::Assembly(format!(
            "{label}: length must be positive, got {}",
            m.length
        )));
    }
    let (a, b) = (&topology.nodes[m.start], &topology.nodes[m.end]);
    let span = libm::hypot(b.x - a.x, b.y - a.y);
    if span == 0.0 {
        return Err(Error::Assembly(format!("{label}: zero-length member")));
    }
    if libm::fabs(span - m.length) > LENGTH_TOLERANCE * m.length {
        return Err(Error::Assembly(format!(
            "{label}: length {} disagrees with node distance {span}",
            m.length
        )));
    }
    Ok(())
}

/// Assembled reduced system.
#[derive(Debug, Clone)]
pub struct FemSystem {
    pub topology: Topology,
    pub dof_map: DofMap,
    pub stiffness: SkylineMatrix,
    /// kN/mm per support
    pub springs: Vec<f64>,
}

pub fn assemble(topology: &Topology, stiffnesses: &[f64]) -> Result<FemSystem> {
    if stiffnesses.len() != topology.supports.len() {
        return Err(Error::DimensionMismatch {
            expected: topology.supports.len(),
            actual: stiffnesses.len(),
        });
    }
    for (s, k) in topology.supports.iter().zip(stiffnesses) {
        if !(*k > 0.0) || !k.is_finite() {
            return Err(Error::Assembly(format!(
                "support {}: stiffness must be positive, got {k}",
                s.id.0
            )));
        }
        if s.node >= topology.nodes.len() {
            return Err(Error::Assembly(format!("support {}: node out of range", s.id.0)));
        }
    }
    for m in topology.members() {
        check_member(topology, m)?;
    }

    let dof_map = DofMap::new(topology);
    let element_dofs = |m: &Member| -> [Option<usize>; 4] {
        [
            dof_map.free_index(m.start, 0),
            dof_map.free_index(m.start, 1),
            dof_map.free_index(m.end, 0),
            dof_map.free_index(m.end, 1),
        ]
    };

    let mut first: Vec<usize> = (0..dof_map.free).collect();
    for m in topology.members() {
        let dofs = element_dofs(m);
        let low = dofs.iter().flatten().copied().min();
        if let Some(low) = low {
            for d in dofs.iter().flatten() {
                first[*d] = first[*d].min(low);
            }
        }
    }
    let mut stiffness = SkylineMatrix::with_profile(first);
    for m in topology.members() {
        let ke = bar_stiffness(&topology.nodes[m.start], &topology.nodes[m.end], m.rigidity, m.length);
        let dofs = element_dofs(m);
        for (i, di) in dofs.iter().enumerate() {
            for (j, dj) in dofs.iter().enumerate() {
                if let (Some(r), Some(c)) = (di, dj) {
                    if r <= c {
                        stiffness.add(*r, *c, ke[i][j]);
                    }
                }
            }
        }
    }
    for (s, k) in topology.supports.iter().zip(stiffnesses) {
        let d = dof_map.free_index(s.node, 1).expect("support vertical unknown is free");
        stiffness.add(d, d, *k);
    }

    Ok(FemSystem {
        topology: topology.clone(),
        dof_map,
        stiffness,
        springs: stiffnesses.to_vec(),
    })
}

/// kN, positive right and up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodalLoad {
    pub node: usize,
    pub fx: f64,
    pub fy: f64,
}

/// `load` kN downward at the apex.
pub fn apex_load(topology: &Topology, load: f64) -> NodalLoad {
    NodalLoad {
        node: topology.apex(),
        fx: 0.0,
        fy: -load,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FemSolution {
    /// `[u, v]` per node, mm.
    pub displacements: Vec<[f64; 2]>,
    /// kN per member, inclined then horizontal as in the topology. Tension
    /// positive.
    pub axial_forces: Vec<f64>,
    /// `[horizontal, vertical]` per support, kN, positive right and up.
    pub support_reactions: Vec<[f64; 2]>,
    /// Largest out-of-balance force over the free unknowns, kN.
    pub equilibrium_residual: f64,
}

impl FemSolution {
    pub fn inclined_forces<'a>(&'a self, topology: &Topology) -> &'a [f64] {
        &self.axial_forces[..topology.inclined.len()]
    }

    pub fn horizontal_forces<'a>(&'a self, topology: &Topology) -> &'a [f64] {
        &self.axial_forces[topology.inclined.len()..]
    }
}

pub fn solve(system: &FemSystem, loads: &[NodalLoad]) -> Result<FemSolution> {
    let topo = &system.topology;
    let map = &system.dof_map;
    let mut external = vec![[0.0f64; 2]; topo.nodes.len()];
    for l in loads {
        if l.node >= topo.nodes.len() {
            return Err(Error::OutOfRange {
                what: "load node",
                detail: format!("{} of {}", l.node, topo.nodes.len()),
            });
        }
        external[l.node][0] += l.fx;
        external[l.node][1] += l.fy;
    }
    let mut rhs = vec![0.0; map.free];
    for (node, f) in external.iter().enumerate() {
        for axis in 0..2 {
            if let Some(d) = map.free_index(node, axis) {
                rhs[d] += f[axis];
            }
        }
    }

    let factor = system.stiffness.cholesky()?;
    let mut x = factor.solve(&rhs);
    for _ in 0..REFINEMENT_STEPS {
        let kx = system.stiffness.mul_vec(&x);
        let residual: Vec<f64> = rhs.iter().zip(&kx).map(|(b, k)| b - k).collect();
        for (xi, dx) in x.iter_mut().zip(factor.solve(&residual)) {
            *xi += dx;
        }
    }
    let displacements: Vec<[f64; 2]> = (0..topo.nodes.len())
        .map(|node| {
            let get = |axis| map.free_index(node, axis).map_or(0.0, |d| x[d]);
            [get(0), get(1)]
        })
        .collect();

    // Member forces and the nodal forces they exert.
    let mut internal = vec![[0.0f64; 2]; topo.nodes.len()];
    let axial_forces: Vec<f64> = topo
        .members()
        .map(|m| {
            let (a, b) = (&topo.nodes[m.start], &topo.nodes[m.end]);
            let (c, s) = direction(a, b);
            let (ua, ub) = (displacements[m.start], displacements[m.end]);
            let elongation = (ub[0] - ua[0]) * c + (ub[1] - ua[1]) * s;
            let force = m.rigidity / m.length * elongation;
            internal[m.start][0] += force * c;
            internal[m.start][1] += force * s;
            internal[m.end][0] -= force * c;
            internal[m.end][1] -= force * s;
            force
        })
        .collect();

    let mut is_support = vec![false; topo.nodes.len()];
    let support_reactions: Vec<[f64; 2]> = topo
        .supports
        .iter()
        .zip(&system.springs)
        .map(|(s, k)| {
            is_support[s.node] = true;
            let vertical = -k * displacements[s.node][1];
            let horizontal = -(internal[s.node][0] + external[s.node][0]);
            internal[s.node][1] += vertical;
            [horizontal, vertical]
        })
        .collect();

    let mut equilibrium_residual = 0.0f64;
    for node in 0..topo.nodes.len() {
        let first_axis = if is_support[node] { 1 } else { 0 };
        for axis in first_axis..2 {
            let r = libm::fabs(internal[node][axis] + external[node][axis]);
            equilibrium_residual = equilibrium_residual.max(r);
        }
    }

    Ok(FemSolution {
        displacements,
        axial_forces,
        support_reactions,
        equilibrium_residual,
    })
}

/// Assembles, loads the apex with `load` kN and solves.
pub fn solve_apex(topology: &Topology, stiffnesses: &[f64], load: f64) -> Result<FemSolution> {
    let system = assemble(topology, stiffnesses)?;
    solve(&system, &[apex_load(topology, load)])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Absolute, for pure-arithmetic identities.
    pub closed_form: f64,
    /// Relative, for solver cross-checks.
    pub fem: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            closed_form: 1e-12,
            fem: 1e-8,
        }
    }
}

/// Deviation of one group of quantities. `max_rel` is the largest absolute
/// deviation over the largest reference magnitude of the group. Both
/// reaction groups share one scale, the largest reaction component, so the
/// small end thrust of a steep truss is not judged on its own magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryReport {
    pub name: &'static str,
    pub max_abs: f64,
    pub max_rel: f64,
    /// Index of the largest deviation within the group.
    pub worst: usize,
    pub count: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub categories: Vec<CategoryReport>,
    pub equilibrium_residual: f64,
    pub passed: bool,
}

impl ComparisonReport {
    pub fn category(&self, name: &str) -> Option<&CategoryReport> {
        self.categories.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.categories {
            writeln!(
                f,
                "{:<26} {}  max_abs={:.3e}  max_rel={:.3e}  worst={}  n={}",
                c.name,
                if c.passed { "PASS" } else { "FAIL" },
                c.max_abs,
                c.max_rel,
                c.worst,
                c.count
            )?;
        }
        writeln!(f, "{:<26} {:.3e} kN", "equilibrium_residual", self.equilibrium_residual)?;
        write!(f, "overall: {}", if self.passed { "PASS" } else { "FAIL" })
    }
}

fn category(
    name: &'static str,
    pairs: impl Iterator<Item = (f64, f64)>,
    scale: Option<f64>,
    tol: f64,
) -> CategoryReport {
    let (mut max_abs, mut max_ref, mut worst, mut count) = (0.0f64, 0.0f64, 0, 0);
    let mut finite = true;
    for (k, (got, want)) in pairs.enumerate() {
        let d = libm::fabs(got - want);
        finite &= d.is_finite();
        if d > max_abs {
            max_abs = d;
            worst = k;
        }
        max_ref = max_ref.max(libm::fabs(want));
        count += 1;
    }
    let denominator = scale.unwrap_or(max_ref);
    let max_rel = if denominator > 0.0 {
        max_abs / denominator
    } else {
        max_abs
    };
    CategoryReport {
        name,
        max_abs,
        max_rel,
        worst,
        count,
        passed: finite && max_rel <= tol,
    }
}

/// FEM against closed form, per category.
pub fn compare(
    topology: &Topology,
    solution: &FemSolution,
    analysis: &AnalysisResult,
    tolerances: &Tolerances,
) -> Result<ComparisonReport> {
    let mismatch = |expected: usize, actual: usize| -> Result<()> {
        if expected == actual {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, actual })
        }
    };
    mismatch(topology.levels, analysis.levels)?;
    mismatch(topology.nodes.len(), solution.displacements.len())?;
    mismatch(topology.nodes.len(), analysis.epsilon.len())?;
    mismatch(topology.nodes.len(), analysis.mu.len())?;
    mismatch(topology.member_count(), solution.axial_forces.len())?;
    mismatch(topology.supports.len(), solution.support_reactions.len())?;
    mismatch(topology.supports.len(), analysis.support_vertical_reaction.len())?;
    mismatch(topology.supports.len(), analysis.support_horizontal_reaction.len())?;
    mismatch(topology.levels, analysis.inclined_force_by_level.len())?;
    mismatch(topology.levels - 1, analysis.horizontal_force_by_level.len())?;

    let tol = tolerances.fem;
    let y = analysis.height;
    let reactions = &solution.support_reactions;
    let incl = solution.inclined_forces(topology);
    let reaction_scale = analysis
        .support_vertical_reaction
        .iter()
        .chain(&analysis.support_horizontal_reaction)
        .fold(0.0f64, |m, r| m.max(libm::fabs(*r)));
    let horiz = solution.horizontal_forces(topology);
    let categories = vec![
        category(
            "vertical_reactions",
            reactions
                .iter()
                .zip(&analysis.support_vertical_reaction)
                .map(|(r, w)| (r[1], *w)),
            Some(reaction_scale),
            tol,
        ),
        category(
            "horizontal_reactions",
            reactions
                .iter()
                .zip(&analysis.support_horizontal_reaction)
                .map(|(r, w)| (r[0], *w)),
            Some(reaction_scale),
            tol,
        ),
        category(
            "inclined_forces",
            topology
                .inclined
                .iter()
                .zip(incl)
                .map(|(m, f)| (*f, analysis.inclined_force_by_level[m.id.level() - 1])),
            None,
            tol,
        ),
        category(
            "horizontal_forces",
            topology
                .horizontal
                .iter()
                .zip(horiz)
                .map(|(m, f)| (*f, analysis.horizontal_force_by_level[m.id.level() - 2])),
            None,
            tol,
        ),
        category(
            "vertical_displacements",
            solution
                .displacements
                .iter()
                .zip(&analysis.epsilon)
                .map(|(d, e)| (d[1] / y, *e)),
            None,
            tol,
        ),
        category(
            "horizontal_displacements",
            solution
                .displacements
                .iter()
                .zip(&analysis.mu)
                .map(|(d, m)| (d[0] / y, *m)),
            None,
            tol,
        ),
    ];
    let passed = categories.iter().all(|c| c.passed);
    Ok(ComparisonReport {
        categories,
        equilibrium_residual: solution.equilibrium_residual,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::{analyze, AnalysisOptions};
    use crate::structure::tests::worked_example;
    use crate::structure::{build_topology, InclinedId, NodeId, Support, SupportId};

    fn node(x: f64, y: f64) -> Node {
        Node {
            id: NodeId::new(1, 1),
            x,
            y,
        }
    }

    fn rel(a: f64, b: f64) -> f64 {
        libm::fabs(a - b) / libm::fabs(b)
    }

    #[test]
    fn axis_aligned_bars() {
        let k = bar_stiffness(&node(0.0, 0.0), &node(2.0, 0.0), 10.0, 2.0);
        assert_eq!(k[0][0], 5.0);
        assert_eq!(k[0][2], -5.0);
        assert_eq!(k[1][1], 0.0);
        assert_eq!(k[0][1], 0.0);
        let k = bar_stiffness(&node(0.0, 0.0), &node(0.0, 4.0), 10.0, 4.0);
        assert!(libm::fabs(k[1][1] - 2.5) < 1e-15);
        assert!(libm::fabs(k[1][3] + 2.5) < 1e-15);
        assert!(libm::fabs(k[0][0]) < 1e-15 && libm::fabs(k[0][1]) < 1e-15);
    }

    #[test]
    fn diagonal_bar() {
        let l = libm::sqrt(2.0);
        let k = bar_stiffness(&node(0.0, 0.0), &node(1.0, 1.0), 4.0, l);
        for row in k {
            for v in row {
                assert!(libm::fabs(libm::fabs(v) - 4.0 / (2.0 * l)) < 1e-14);
            }
        }
    }

    /// Two bars meeting at an apex over two springs.
    fn two_bar() -> Topology {
        let nodes = vec![
            Node {
                id: NodeId::new(1, 1),
                x: 1.0,
                y: 1.0,
            },
            Node {
                id: NodeId::new(2, 1),
                x: 0.0,
                y: 0.0,
            },
            Node {
                id: NodeId::new(2, 2),
                x: 2.0,
                y: 0.0,
            },
        ];
        let bar = |p, end| Member {
            id: MemberId::Inclined(InclinedId { level: 1, position: p }),
            start: 0,
            end,
            length: libm::sqrt(2.0),
            rigidity: 100.0,
        };
        Topology {
            levels: 1,
            nodes,
            inclined: vec![bar(1, 1), bar(2, 2)],
            horizontal: vec![],
            supports: vec![
                Support {
                    id: SupportId(1),
                    node: 1,
                },
                Support {
                    id: SupportId(2),
                    node: 2,
                },
            ],
        }
    }

    #[test]
    fn two_bar_statics() {
        let t = two_bar();
        let sol = solve_apex(&t, &[3.0, 3.0], 10.0).unwrap();
        let f = -10.0 / (2.0 * libm::sqrt(0.5));
        for a in &sol.axial_forces {
            assert!(rel(*a, f) < 1e-14);
        }
        assert!(rel(sol.support_reactions[0][1], 5.0) < 1e-14);
        assert!(rel(sol.support_reactions[0][0], 5.0) < 1e-14);
        assert!(rel(sol.support_reactions[1][0], -5.0) < 1e-14);
        assert!(rel(sol.displacements[1][1], -5.0 / 3.0) < 1e-14);
        assert!(sol.equilibrium_residual < 1e-12);
    }

    #[test]
    fn assembly_errors() {
        let t = two_bar();
        assert!(matches!(assemble(&t, &[1.0]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(assemble(&t, &[1.0, 0.0]), Err(Error::Assembly(_))));
        let mut bad = t.clone();
        bad.inclined[0].rigidity = -1.0;
        assert!(matches!(assemble(&bad, &[1.0, 1.0]), Err(Error::Assembly(_))));
        let mut bad = t.clone();
        bad.nodes[1].x = 1.0;
        bad.nodes[1].y = 1.0;
        let err = assemble(&bad, &[1.0, 1.0]).unwrap_err();
        assert!(format!("{err}").contains("zero-length"));
        let mut bad = t;
        bad.inclined[1].length = 3.0;
        assert!(matches!(assemble(&bad, &[1.0, 1.0]), Err(Error::Assembly(_))));
    }

    #[test]
    fn mechanism_is_reported() {
        // a single bar standing on one spring can sway
        let t = Topology {
            levels: 1,
            nodes: vec![
                Node {
                    id: NodeId::new(1, 1),
                    x: 0.0,
                    y: 1.0,
                },
                Node {
                    id: NodeId::new(2, 1),
                    x: 0.0,
                    y: 0.0,
                },
            ],
            inclined: vec![Member {
                id: MemberId::Inclined(InclinedId { level: 1, position: 1 }),
                start: 0,
                end: 1,
                length: 1.0,
                rigidity: 1.0,
            }],
            horizontal: vec![],
            supports: vec![Support {
                id: SupportId(1),
                node: 1,
            }],
        };
        let err = solve_apex(&t, &[1.0], 1.0).unwrap_err();
        assert!(matches!(err, Error::Factorization { .. }));
        assert!(format!("{err}").contains("mechanism or invalid restraint"));
    }

    #[test]
    fn free_dof_count() {
        for n in 2..=6 {
            let mut c = worked_example();
            c.levels = n;
            c.ratios_inclined = crate::fractal::RatioSequence::inclined(vec![1.0; n]).unwrap();
            c.ratios_horizontal = crate::fractal::RatioSequence::horizontal(vec![1.0; n - 1]).unwrap();
            c.boundary.z2 = (1 << (n - 1)) + 1;
            let t = build_topology(&c).unwrap();
            let map = DofMap::new(&t);
            assert_eq!(map.free, 2 * 3 * (1 << (n - 1)) - ((1 << (n - 1)) + 1));
        }
    }

    #[test]
    fn skyline_matches_dense_solution() {
        let c = worked_example();
        let r = analyze(&c, AnalysisOptions::default()).unwrap();
        let t = build_topology(&c).unwrap();
        let sys = assemble(&t, &r.stiffness).unwrap();
        let dense = sys.stiffness.to_dense();
        for i in 0..dense.size() {
            assert!(dense.get(i, i) > 0.0);
        }
        let mut rhs = vec![0.0; sys.dof_map.free];
        rhs[sys.dof_map.free_index(0, 1).unwrap()] = -c.load;
        let xd = dense.cholesky().unwrap().solve(&rhs);
        let xs = sys.stiffness.cholesky().unwrap().solve(&rhs);
        let scale = xd.iter().fold(0.0f64, |a, v| a.max(libm::fabs(*v)));
        for (a, b) in xd.iter().zip(&xs) {
            assert!(libm::fabs(a - b) <= 1e-12 * scale);
        }
        assert!(sys.stiffness.stored() < dense.size() * dense.size() / 4);
    }

    #[test]
    fn worked_example_reactions() {
        let c = worked_example();
        let r = analyze(&c, AnalysisOptions::default()).unwrap();
        let t = build_topology(&c).unwrap();
        let sol = solve_apex(&t, &r.stiffness, c.load).unwrap();
        let reactions = &sol.support_reactions;
        assert!(rel(reactions[0][1], 3.125) < 1e-8);
        assert!(rel(reactions[16][1], 3.125) < 1e-8);
        for r in &reactions[1..16] {
            assert!(rel(r[1], 6.25) < 1e-8);
            assert!(libm::fabs(r[0]) < 1e-9 * c.load);
        }
        assert!(rel(reactions[0][0], 1.5625) < 1e-8);
        assert!(rel(reactions[16][0], -1.5625) < 1e-8);
        assert!(rel(sol.displacements[t.supports[0].node][1], -1050.0) < 1e-8);
        assert!(sol.equilibrium_residual < 1e-9 * c.load);
        let report = compare(&t, &sol, &r, &Tolerances::default()).unwrap();
        assert!(report.passed, "{report}");
    }

    #[test]
    fn perturbed_spring_is_detected() {
        let c = worked_example();
        let r = analyze(&c, AnalysisOptions::default()).unwrap();
        let t = build_topology(&c).unwrap();
        let mut k = r.stiffness.clone();
        k[5] *= 1.1;
        let sol = solve_apex(&t, &k, c.load).unwrap();
        let report = compare(&t, &sol, &r, &Tolerances::default()).unwrap();
        assert!(!report.passed);
        let v = report.category("vertical_reactions").unwrap();
        assert!(!v.passed);
        assert_eq!(v.worst, 5);
    }

    #[test]
    fn zero_load_gives_zero_response() {
        let c = worked_example();
        let r = analyze(&c, AnalysisOptions::default()).unwrap();
        let t = build_topology(&c).unwrap();
        let sol = solve_apex(&t, &r.stiffness, 0.0).unwrap();
        assert!(sol.displacements.iter().all(|d| d[0] == 0.0 && d[1] == 0.0));
        assert!(sol.axial_forces.iter().all(|f| *f == 0.0));
        assert!(sol.support_reactions.iter().all(|r| r[0] == 0.0 && r[1] == 0.0));
    }

    #[test]
    fn compare_rejects_shape_mismatch() {
        let c = worked_example();
        let r = analyze(&c, AnalysisOptions::default()).unwrap();
        let t = build_topology(&c).unwrap();
        let mut sol = solve_apex(&t, &r.stiffness, c.load).unwrap();
        sol.axial_forces.pop();
        assert!(matches!(
            compare(&t, &sol, &r, &Tolerances::default()),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
