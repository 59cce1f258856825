//! Closed-form analysis of the uniform-distribution state.
//!
//! Given a configuration, the apex load spreads as `F/2^N` on the two end
//! supports and `F/2^{N−1}` on the others. That state is compatible only if
//! the supports settle by
//!
//! ```text
//! δ_i = Ω^H G((i−1)/2^{N−1}; P^H_N) + χ (i − z1) + Λ_1
//! ```
//!
//! with `Ω^H = F c³ / (2 A^H E^H s³)`. Everything else here (stiffnesses,
//! nodal displacements `ε`, `μ`, the profile functions `f_δ`, `f_ε`, `f_μ`)
//! follows from that expression. All displacements are per unit height.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fractal::{j_function, takagi_class, takagi_class_dyadic, DyadicPoint, RatioSequence, Terms};
use crate::num::{pow2, pow4};
use crate::structure::{node_ids, support_count, NodeId, StructureConfig};

/// `Ω^H`, `Ω^I`, `Λ_1`, `Λ_2` and `χ` for one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionlessGroups {
    pub omega_h: f64,
    pub omega_i: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub chi: f64,
}

impl DimensionlessGroups {
    pub fn new(config: &StructureConfig) -> Result<Self> {
        config.validate()?;
        let incl = &config.inclination;
        let cot = incl.cot();
        let s = incl.sin();
        let omega_h = config.load * cot * cot * cot / (2.0 * config.horizontal.rigidity());
        let omega_i = config.load / (config.inclined.rigidity() * s * s * s);
        let b = &config.boundary;
        let lambda1 = b.d1 - omega_h * support_g(config, b.z1)?;
        let lambda2 = b.d2 - omega_h * support_g(config, b.z2)?;
        let chi = (lambda2 - lambda1) / (b.z2 as f64 - b.z1 as f64);
        Ok(Self {
            omega_h,
            omega_i,
            lambda1,
            lambda2,
            chi,
        })
    }
}

/// `G((i−1)/2^{N−1}; P^H_N)` for 1-based support `i`.
fn support_g(config: &StructureConfig, support: usize) -> Result<f64> {
    let x = DyadicPoint::new(support as u64 - 1, config.levels as u32 - 1)?;
    takagi_class_dyadic(x, &config.ratios_horizontal, Terms::AllFinite)
}

/// `G((t−1)/2^{n−1})` and `G(t/2^{n−1})`, the abscissae of the two supports
/// bounding the sub-structure under node `(n, t)`.
fn flank_g(config: &StructureConfig, level: usize, ordinal: usize) -> Result<(f64, f64)> {
    let p = level as u32 - 1;
    let left = DyadicPoint::new(ordinal as u64 - 1, p)?;
    let right = DyadicPoint::new(ordinal as u64, p)?;
    Ok((
        takagi_class_dyadic(left, &config.ratios_horizontal, Terms::AllFinite)?,
        takagi_class_dyadic(right, &config.ratios_horizontal, Terms::AllFinite)?,
    ))
}

/// Axial forces per level, kN. Negative is compression.
#[derive(Debug, Clone, PartialEq)]
pub struct MemberForces {
    /// Level 1..N.
    pub inclined: Vec<f64>,
    /// Level 2..N.
    pub horizontal: Vec<f64>,
}

/// `−F/(2^n s)` on inclined members, `F c/(2^{n−1} s)` on horizontal ones.
pub fn member_forces(config: &StructureConfig) -> Result<MemberForces> {
    config.validate()?;
    let f = config.load;
    let s = config.inclination.sin();
    let cot = config.inclination.cot();
    let inclined = (1..=config.levels).map(|n| -f / (pow2(n as i32) * s)).collect();
    let horizontal = (2..=config.levels).map(|n| f * cot / pow2(n as i32 - 1)).collect();
    Ok(MemberForces { inclined, horizontal })
}

/// Support reactions, kN. Vertical is positive upward, horizontal positive
/// to the right.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportReactions {
    pub vertical: Vec<f64>,
    pub horizontal: Vec<f64>,
}

pub fn support_reactions(config: &StructureConfig) -> Result<SupportReactions> {
    config.validate()?;
    let n = config.levels;
    let count = support_count(n);
    let f = config.load;
    let end = f / pow2(n as i32);
    let vertical = (1..=count)
        .map(|i| if i == 1 || i == count { end } else { 2.0 * end })
        .collect();
    let thrust = end * config.inclination.cot();
    let mut horizontal = alloc::vec![0.0; count];
    horizontal[0] = thrust;
    horizontal[count - 1] = -thrust;
    Ok(SupportReactions { vertical, horizontal })
}

/// `δ_i` for every support without the sign check.
pub fn support_displacements_unchecked(config: &StructureConfig, groups: &DimensionlessGroups) -> Result<Vec<f64>> {
    let z1 = config.boundary.z1 as f64;
    (1..=support_count(config.levels))
        .map(|i| {
            let g = support_g(config, i)?;
            Ok(groups.omega_h * g + groups.chi * (i as f64 - z1) + groups.lambda1)
        })
        .collect()
}

/// `δ_i` for every support. Fails unless all settlements are strictly
/// downward. The prescribed supports reproduce `d1`, `d2` exactly.
pub fn support_displacements(config: &StructureConfig) -> Result<Vec<f64>> {
    let groups = DimensionlessGroups::new(config)?;
    let mut delta = support_displacements_unchecked(config, &groups)?;
    let b = &config.boundary;
    delta[b.z1 - 1] = b.d1;
    delta[b.z2 - 1] = b.d2;
    check_compressive(&delta)?;
    Ok(delta)
}

fn check_compressive(delta: &[f64]) -> Result<()> {
    let offending: Vec<usize> = delta
        .iter()
        .enumerate()
        .filter(|(_, d)| !(**d < 0.0))
        .map(|(i, _)| i + 1)
        .collect();
    if offending.is_empty() {
        Ok(())
    } else {
        Err(Error::NonCompressive { supports: offending })
    }
}

fn check_support_len(config: &StructureConfig, delta: &[f64]) -> Result<()> {
    let expected = support_count(config.levels);
    if delta.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            actual: delta.len(),
        });
    }
    Ok(())
}

/// One compatibility equation of the hyperstatic system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvwResidual {
    pub m: usize,
    pub u: usize,
    pub value: f64,
}

/// Residuals of the `2^{N−1} − 1` compatibility equations
/// `δ_a − 2δ_b + δ_c + 2Ω^H/(4^m ρ^H_{m+2}) = 0`, where `a`, `b`, `c` are the
/// left, middle and right supports of the `(u+1)`-th sub-structure with
/// `N − m` levels.
pub fn pvw_residuals(config: &StructureConfig, delta: &[f64]) -> Result<Vec<PvwResidual>> {
    let groups = DimensionlessGroups::new(config)?;
    check_support_len(config, delta)?;
    let n = config.levels;
    let mut out = Vec::with_capacity((1 << (n - 1)) - 1);
    for m in 0..=(n - 2) {
        let span = 1usize << (n - m - 1);
        let rhs = 2.0 * groups.omega_h / (pow4(m) * config.ratios_horizontal.element(m)?);
        for u in 0..(1usize << m) {
            let a = u * span;
            let b = a + span / 2;
            let c = a + span;
            let value = delta[a] - 2.0 * delta[b] + delta[c] + rhs;
            out.push(PvwResidual { m, u, value });
        }
    }
    Ok(out)
}

/// Support stiffness `k_i` (kN/mm) making support `i` settle `δ_i Y` under
/// its share of the load.
pub fn support_stiffnesses(config: &StructureConfig, delta: &[f64]) -> Result<Vec<f64>> {
    config.validate()?;
    check_support_len(config, delta)?;
    check_compressive(delta)?;
    Ok(stiffnesses_unchecked(config, delta))
}

fn stiffnesses_unchecked(config: &StructureConfig, delta: &[f64]) -> Vec<f64> {
    let n = config.levels;
    let count = delta.len();
    delta
        .iter()
        .enumerate()
        .map(|(k, d)| {
            let share = if k == 0 || k == count - 1 {
                pow2(n as i32)
            } else {
                pow2(n as i32 - 1)
            };
            config.load / (-share * config.height * d)
        })
        .collect()
}

/// `2/(4^N ρ^I_N) + Σ_{k=n}^{N−1} 1/(4^k ρ^I_k)`: the inclined-member
/// compliance along the two edges below a level-`n` node.
pub fn inclined_compliance(config: &StructureConfig, level: usize) -> Result<f64> {
    let n = config.levels;
    let rho = &config.ratios_inclined;
    let mut sum = 2.0 / (pow4(n) * rho.ratio(n)?);
    for k in level..n {
        sum += 1.0 / (pow4(k) * rho.ratio(k)?);
    }
    Ok(sum)
}

/// `ε_{n,t}` for every node in level-major order. Support rows copy `δ`.
pub fn vertical_displacements(config: &StructureConfig, delta: &[f64]) -> Result<Vec<f64>> {
    let groups = DimensionlessGroups::new(config)?;
    check_support_len(config, delta)?;
    vertical_displacements_with(config, &groups, delta)
}

fn vertical_displacements_with(
    config: &StructureConfig,
    groups: &DimensionlessGroups,
    delta: &[f64],
) -> Result<Vec<f64>> {
    let n = config.levels;
    let z1 = config.boundary.z1 as f64;
    let compliance: Vec<f64> = (1..=n)
        .map(|level| inclined_compliance(config, level))
        .collect::<Result<_>>()?;
    node_ids(n)
        .map(|id| {
            if id.level == n + 1 {
                return Ok(delta[id.ordinal - 1]);
            }
            let (gl, gr) = flank_g(config, id.level, id.ordinal)?;
            let abscissa = libm::ldexp((2 * id.ordinal - 1) as f64, n as i32 - id.level as i32 - 1);
            Ok(
                0.5 * groups.omega_h * (gl + gr) + groups.chi * (abscissa + 1.0 - z1) + groups.lambda1
                    - groups.omega_i * compliance[id.level - 1],
            )
        })
        .collect()
}

/// `μ_{n,t}` for every node in level-major order, from the difference of
/// the two flanking Takagi values. Support rows are zero.
pub fn horizontal_displacements(config: &StructureConfig) -> Result<Vec<f64>> {
    let groups = DimensionlessGroups::new(config)?;
    horizontal_displacements_with(config, &groups)
}

fn horizontal_displacements_with(config: &StructureConfig, groups: &DimensionlessGroups) -> Result<Vec<f64>> {
    let n = config.levels;
    let tan = config.inclination.tan();
    node_ids(n)
        .map(|id| {
            if id.level == n + 1 {
                return Ok(0.0);
            }
            let (gl, gr) = flank_g(config, id.level, id.ordinal)?;
            Ok(0.5 * groups.omega_h * tan * (gl - gr) - groups.chi * tan * pow2(n as i32 - id.level as i32 - 1))
        })
        .collect()
}

/// `μ_{n,t}` through the digit function `J`:
///
/// ```text
/// μ = Ω^H s/(2^{n−2} c) (2J((2t−1)/2^n) − 1/(2^{n−1} ρ_{n+1}) − Σ_{k<n−1} 1/(2^{k+1} ρ_{k+2})) − χ 2^{N−n−1} s/c
/// ```
///
/// The last level needs `ρ^H_{N+1}`, so `ratios` must carry an extension;
/// its value cancels.
pub fn horizontal_displacements_j_form(config: &StructureConfig, ratios: &RatioSequence) -> Result<Vec<f64>> {
    let groups = DimensionlessGroups::new(config)?;
    let profile = DisplacementProfile::new(config, ratios.clone())?;
    let n = config.levels;
    node_ids(n)
        .map(|id| {
            if id.level == n + 1 {
                return Ok(0.0);
            }
            let x = DyadicPoint::new(2 * id.ordinal as u64 - 1, id.level as u32)?;
            profile.j_form(&groups, id.level, x)
        })
        .collect()
}

/// `f_δ`, `f_ε` and `f_μ` for one configuration and one extension of the
/// horizontal ratios. On the node grids they reproduce `δ`, `ε` and `μ`
/// whatever the extension.
#[derive(Debug, Clone)]
pub struct DisplacementProfile<'a> {
    config: &'a StructureConfig,
    groups: DimensionlessGroups,
    ratios: RatioSequence,
    depth: usize,
}

impl<'a> DisplacementProfile<'a> {
    /// `ratios` must extend the configuration's `P^H_N`.
    pub fn new(config: &'a StructureConfig, ratios: RatioSequence) -> Result<Self> {
        let groups = DimensionlessGroups::new(config)?;
        if ratios.finite().len() < config.ratios_horizontal.finite().len()
            || (0..config.ratios_horizontal.finite().len())
                .any(|k| ratios.element(k).ok() != config.ratios_horizontal.element(k).ok())
        {
            return Err(Error::Domain(format!(
                "ratio sequence does not extend P^H_{} of the configuration",
                config.levels
            )));
        }
        Ok(Self {
            config,
            groups,
            ratios,
            depth: crate::fractal::DEFAULT_TRUNCATION_DEPTH,
        })
    }

    /// Series depth for the real-valued evaluators.
    pub fn with_depth(mut self, depth: usize) -> Self {
        self.depth = depth;
        self
    }

    pub fn groups(&self) -> &DimensionlessGroups {
        &self.groups
    }

    pub fn ratios(&self) -> &RatioSequence {
        &self.ratios
    }

    fn real_terms(&self) -> Terms {
        match self.ratios.defined_len() {
            None => Terms::UpTo(self.depth),
            Some(len) => Terms::UpTo(self.depth.min(len)),
        }
    }

    fn g_exact(&self, x: DyadicPoint) -> Result<f64> {
        takagi_class_dyadic(x, &self.ratios, Terms::UpTo(x.log2_denominator() as usize))
    }

    fn check_level(&self, level: usize) -> Result<()> {
        if level < 1 || level > self.config.levels + 1 {
            return Err(Error::OutOfRange {
                what: "level",
                detail: format!("1..={}, got {level}", self.config.levels + 1),
            });
        }
        Ok(())
    }

    fn linear(&self, x: f64) -> f64 {
        let n = self.config.levels;
        self.groups.chi * (pow2(n as i32 - 1) * x + 1.0 - self.config.boundary.z1 as f64) + self.groups.lambda1
    }

    pub fn f_delta(&self, x: DyadicPoint) -> Result<f64> {
        Ok(self.groups.omega_h * self.g_exact(x)? + self.linear(x.value()))
    }

    /// `f_ε(n, x)`. For `n ≤ N` the two Takagi arguments `x ± 2^{−n}` must
    /// stay in `[0, 1]`; level `N + 1` is `f_δ`.
    pub fn f_epsilon(&self, level: usize, x: DyadicPoint) -> Result<f64> {
        self.check_level(level)?;
        if level == self.config.levels + 1 {
            return self.f_delta(x);
        }
        let step = DyadicPoint::new(1, level as u32)?;
        let (left, right) = match (x.checked_sub(step), x.checked_add(step)) {
            (Some(l), Some(r)) => (l, r),
            _ => return Err(self.edge_error(level, x.value())),
        };
        let g = self.g_exact(left)? + self.g_exact(right)?;
        Ok(0.5 * self.groups.omega_h * g + self.linear(x.value())
            - self.groups.omega_i * inclined_compliance(self.config, level)?)
    }

    /// `f_μ(n, x)`; zero on the support level.
    pub fn f_mu(&self, level: usize, x: DyadicPoint) -> Result<f64> {
        self.check_level(level)?;
        if level == self.config.levels + 1 {
            return Ok(0.0);
        }
        self.j_form(&self.groups, level, x)
    }

    fn j_form(&self, groups: &DimensionlessGroups, level: usize, x: DyadicPoint) -> Result<f64> {
        let n = self.config.levels;
        let tan = self.config.inclination.tan();
        let mut offset = pow2(-(level as i32 - 1)) / self.ratios.element(level - 1)?;
        for k in 0..level.saturating_sub(1) {
            offset += pow2(-(k as i32 + 1)) / self.ratios.element(k)?;
        }
        let j = j_function(x, &self.ratios)?;
        Ok(groups.omega_h * tan / pow2(level as i32 - 2) * (2.0 * j - offset)
            - groups.chi * tan * pow2(n as i32 - level as i32 - 1))
    }

    /// `f_δ` at any `x`, with the Takagi series truncated.
    pub fn f_delta_real(&self, x: f64) -> Result<f64> {
        Ok(self.groups.omega_h * takagi_class(x, &self.ratios, self.real_terms())? + self.linear(x))
    }

    /// `f_ε` at any `x` in `[2^{−n}, 1 − 2^{−n}]`.
    pub fn f_epsilon_real(&self, level: usize, x: f64) -> Result<f64> {
        self.check_level(level)?;
        if level == self.config.levels + 1 {
            return self.f_delta_real(x);
        }
        let step = pow2(-(level as i32));
        let (left, right) = (x - step, x + step);
        if !(left >= 0.0 && right <= 1.0) {
            return Err(self.edge_error(level, x));
        }
        let terms = self.real_terms();
        let g = takagi_class(left, &self.ratios, terms)? + takagi_class(right, &self.ratios, terms)?;
        Ok(0.5 * self.groups.omega_h * g + self.linear(x)
            - self.groups.omega_i * inclined_compliance(self.config, level)?)
    }

    /// `f_μ` at any `x`, with `J` truncated to the series depth.
    pub fn f_mu_real(&self, level: usize, x: f64) -> Result<f64> {
        self.check_level(level)?;
        if level == self.config.levels + 1 {
            return Ok(0.0);
        }
        let n = self.config.levels;
        let tan = self.config.inclination.tan();
        let mut offset = pow2(-(level as i32 - 1)) / self.ratios.element(level - 1)?;
        for k in 0..level.saturating_sub(1) {
            offset += pow2(-(k as i32 + 1)) / self.ratios.element(k)?;
        }
        let depth = match self.ratios.defined_len() {
            None => self.depth,
            Some(len) => self.depth.min(len),
        };
        let j = crate::fractal::j_function_real(x, &self.ratios, depth)?;
        Ok(self.groups.omega_h * tan / pow2(level as i32 - 2) * (2.0 * j - offset)
            - self.groups.chi * tan * pow2(n as i32 - level as i32 - 1))
    }

    fn edge_error(&self, level: usize, x: f64) -> Error {
        Error::Domain(format!(
            "f_epsilon at level {level} is defined on [2^-{level}, 1 - 2^-{level}], got x = {x}"
        ))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AnalysisOptions {
    /// Report non-downward settlements instead of failing.
    pub allow_nonnegative_delta: bool,
}

/// Every closed-form quantity for one configuration. Per-node vectors follow
/// the level-major order of [`crate::structure::node_ids`].
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisResult {
    pub levels: usize,
    /// mm
    pub height: f64,
    /// kN
    pub load: f64,
    pub groups: DimensionlessGroups,
    /// kN, level 1..N
    pub inclined_force_by_level: Vec<f64>,
    /// kN, level 2..N
    pub horizontal_force_by_level: Vec<f64>,
    /// kN
    pub support_vertical_reaction: Vec<f64>,
    /// kN
    pub support_horizontal_reaction: Vec<f64>,
    pub delta: Vec<f64>,
    /// kN/mm
    pub stiffness: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub mu: Vec<f64>,
}

impl AnalysisResult {
    pub fn node_index(&self, id: NodeId) -> Result<usize> {
        id.check(self.levels)?;
        Ok(id.index(self.levels))
    }

    pub fn epsilon_at(&self, id: NodeId) -> Result<f64> {
        Ok(self.epsilon[self.node_index(id)?])
    }

    pub fn mu_at(&self, id: NodeId) -> Result<f64> {
        Ok(self.mu[self.node_index(id)?])
    }

    /// Supports whose settlement is not strictly downward (1-based).
    pub fn nonnegative_supports(&self) -> Vec<usize> {
        match check_compressive(&self.delta) {
            Ok(()) => Vec::new(),
            Err(Error::NonCompressive { supports }) => supports,
            Err(_) => unreachable!(),
        }
    }
}

pub fn analyze(config: &StructureConfig, options: AnalysisOptions) -> Result<AnalysisResult> {
    let groups = DimensionlessGroups::new(config)?;
    let forces = member_forces(config)?;
    let reactions = support_reactions(config)?;
    let mut delta = support_displacements_unchecked(config, &groups)?;
    let b = &config.boundary;
    delta[b.z1 - 1] = b.d1;
    delta[b.z2 - 1] = b.d2;
    if !options.allow_nonnegative_delta {
        check_compressive(&delta)?;
    }
    let stiffness = stiffnesses_unchecked(config, &delta);
    let epsilon = vertical_displacements_with(config, &groups, &delta)?;
    let mu = horizontal_displacements_with(config, &groups)?;
    Ok(AnalysisResult {
        levels: config.levels,
        height: config.height,
        load: config.load,
        groups,
        inclined_force_by_level: forces.inclined,
        horizontal_force_by_level: forces.horizontal,
        support_vertical_reaction: reactions.vertical,
        support_horizontal_reaction: reactions.horizontal,
        delta,
        stiffness,
        epsilon,
        mu,
    })
}
