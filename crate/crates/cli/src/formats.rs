//! On-disk artifacts.
//!
//! Every JSON document carries `schema_version` and `kind`. Node indices
//! follow the level-major order (apex first, supports last); member indices
//! list inclined members before horizontal ones.
//!
//! * `topology`: `nodes[{index, level, ordinal, x, y}]` (mm),
//!   `members[{index, family, level, position, start, end, length, ea}]`
//!   (mm, kN), `supports[{id, node}]`, plus `levels`.
//! * `analysis`: closed-form results; displacements per unit height.
//! * `fem_solution`: `displacements[[u, v]]` (mm), `axial_forces` (kN),
//!   `support_reactions[[h, v]]` (kN), `equilibrium_residual` (kN).
//! * `comparison`: one entry per category plus the overall verdict.

use std::path::Path;

use quasi_sierpinski::closed_form::{AnalysisResult, DimensionlessGroups, PvwResidual};
use quasi_sierpinski::fem::{ComparisonReport, FemSolution};
use quasi_sierpinski::structure::{
    node_ids, HorizontalId, InclinedId, Member, MemberId, Node, NodeId, Support, SupportId, Topology,
};
use serde_json::{json, Value};

use crate::error::CliError;
use crate::json::{fmt_f64, to_canonical_string};

pub const SCHEMA_VERSION: u64 = 1;

pub fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    std::fs::write(path, to_canonical_string(value)).map_err(|e| CliError::io(path, e))
}

pub fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.to_owned(),
        message: e.to_string(),
    })
}

fn header(kind: &str) -> Value {
    json!({"schema_version": SCHEMA_VERSION, "kind": kind})
}

pub fn topology_to_json(topology: &Topology) -> Value {
    let mut v = header("topology");
    v["levels"] = json!(topology.levels);
    v["nodes"] = topology
        .nodes
        .iter()
        .enumerate()
        .map(|(k, n)| json!({"index": k, "level": n.id.level, "ordinal": n.id.ordinal, "x": n.x, "y": n.y}))
        .collect();
    v["members"] = topology
        .members()
        .enumerate()
        .map(|(k, m)| {
            let (family, level, position) = match m.id {
                MemberId::Inclined(id) => ("inclined", id.level, id.position),
                MemberId::Horizontal(id) => ("horizontal", id.level, id.position),
            };
            json!({
                "index": k,
                "family": family,
                "level": level,
                "position": position,
                "start": m.start,
                "end": m.end,
                "length": m.length,
                "ea": m.rigidity,
            })
        })
        .collect();
    v["supports"] = topology
        .supports
        .iter()
        .map(|s| json!({"id": s.id.0, "node": s.node}))
        .collect();
    v
}

/// Field access that reports the JSON path of whatever is missing.
struct Doc<'a> {
    path: &'a Path,
}

impl Doc<'_> {
    fn fail(&self, message: impl Into<String>) -> CliError {
        CliError::Parse {
            path: self.path.to_owned(),
            message: message.into(),
        }
    }

    fn check_kind(&self, v: &Value, kind: &str) -> Result<(), CliError> {
        if v["kind"] != kind {
            return Err(self.fail(format!("expected a {kind} document, got kind {}", v["kind"])));
        }
        if v["schema_version"] != SCHEMA_VERSION {
            return Err(self.fail(format!("unsupported schema_version {}", v["schema_version"])));
        }
        Ok(())
    }

    fn f64(&self, v: &Value, at: &str) -> Result<f64, CliError> {
        v.as_f64().ok_or_else(|| self.fail(format!("{at}: expected a number")))
    }

    fn usize(&self, v: &Value, at: &str) -> Result<usize, CliError> {
        v.as_u64()
            .map(|x| x as usize)
            .ok_or_else(|| self.fail(format!("{at}: expected an integer")))
    }

    fn array<'v>(&self, v: &'v Value, at: &str) -> Result<&'v Vec<Value>, CliError> {
        v.as_array()
            .ok_or_else(|| self.fail(format!("{at}: expected an array")))
    }

    fn f64s(&self, v: &Value, at: &str) -> Result<Vec<f64>, CliError> {
        self.array(v, at)?
            .iter()
            .enumerate()
            .map(|(k, x)| self.f64(x, &format!("{at}[{k}]")))
            .collect()
    }
}

pub fn topology_from_json(v: &Value, path: &Path) -> Result<Topology, CliError> {
    let d = Doc { path };
    d.check_kind(v, "topology")?;
    let levels = d.usize(&v["levels"], "levels")?;
    let mut nodes = Vec::new();
    for (k, n) in d.array(&v["nodes"], "nodes")?.iter().enumerate() {
        let at = format!("nodes[{k}]");
        nodes.push(Node {
            id: NodeId::new(d.usize(&n["level"], &at)?, d.usize(&n["ordinal"], &at)?),
            x: d.f64(&n["x"], &at)?,
            y: d.f64(&n["y"], &at)?,
        });
    }
    let (mut inclined, mut horizontal) = (Vec::new(), Vec::new());
    for (k, m) in d.array(&v["members"], "members")?.iter().enumerate() {
        let at = format!("members[{k}]");
        let level = d.usize(&m["level"], &at)?;
        let position = d.usize(&m["position"], &at)?;
        let start = d.usize(&m["start"], &at)?;
        let end = d.usize(&m["end"], &at)?;
        if start >= nodes.len() || end >= nodes.len() {
            return Err(d.fail(format!("{at}: end node out of range")));
        }
        let member = |id| Member {
            id,
            start,
            end,
            length: 0.0,
            rigidity: 0.0,
        };
        let mut built = match m["family"].as_str() {
            Some("inclined") => member(MemberId::Inclined(InclinedId { level, position })),
            Some("horizontal") => member(MemberId::Horizontal(HorizontalId { level, position })),
            _ => return Err(d.fail(format!("{at}.family: expected \"inclined\" or \"horizontal\""))),
        };
        built.length = d.f64(&m["length"], &at)?;
        built.rigidity = d.f64(&m["ea"], &at)?;
        match built.id {
            MemberId::Inclined(_) => inclined.push(built),
            MemberId::Horizontal(_) => horizontal.push(built),
        }
    }
    let mut supports = Vec::new();
    for (k, s) in d.array(&v["supports"], "supports")?.iter().enumerate() {
        let at = format!("supports[{k}]");
        let node = d.usize(&s["node"], &at)?;
        if node >= nodes.len() {
            return Err(d.fail(format!("{at}: node out of range")));
        }
        supports.push(Support {
            id: SupportId(d.usize(&s["id"], &at)?),
            node,
        });
    }
    if nodes.is_empty() || supports.is_empty() {
        return Err(d.fail("topology needs nodes and supports"));
    }
    Ok(Topology {
        levels,
        nodes,
        inclined,
        horizontal,
        supports,
    })
}

pub fn analysis_to_json(result: &AnalysisResult, residuals: &[PvwResidual]) -> Value {
    let g = &result.groups;
    let mut v = header("analysis");
    v["levels"] = json!(result.levels);
    v["height"] = json!(result.height);
    v["load"] = json!(result.load);
    v["groups"] = json!({
        "omega_h": g.omega_h,
        "omega_i": g.omega_i,
        "lambda1": g.lambda1,
        "lambda2": g.lambda2,
        "chi": g.chi,
    });
    v["inclined_force_by_level"] = json!(result.inclined_force_by_level);
    v["horizontal_force_by_level"] = json!(result.horizontal_force_by_level);
    v["support_vertical_reaction"] = json!(result.support_vertical_reaction);
    v["support_horizontal_reaction"] = json!(result.support_horizontal_reaction);
    v["delta"] = json!(result.delta);
    v["stiffness"] = json!(result.stiffness);
    v["epsilon"] = json!(result.epsilon);
    v["mu"] = json!(result.mu);
    v["nonnegative_supports"] = json!(result.nonnegative_supports());
    v["pvw_residuals"] = residuals
        .iter()
        .map(|r| json!({"m": r.m, "u": r.u, "value": r.value}))
        .collect();
    v
}

pub fn analysis_from_json(v: &Value, path: &Path) -> Result<AnalysisResult, CliError> {
    let d = Doc { path };
    d.check_kind(v, "analysis")?;
    let g = &v["groups"];
    Ok(AnalysisResult {
        levels: d.usize(&v["levels"], "levels")?,
        height: d.f64(&v["height"], "height")?,
        load: d.f64(&v["load"], "load")?,
        groups: DimensionlessGroups {
            omega_h: d.f64(&g["omega_h"], "groups.omega_h")?,
            omega_i: d.f64(&g["omega_i"], "groups.omega_i")?,
            lambda1: d.f64(&g["lambda1"], "groups.lambda1")?,
            lambda2: d.f64(&g["lambda2"], "groups.lambda2")?,
            chi: d.f64(&g["chi"], "groups.chi")?,
        },
        inclined_force_by_level: d.f64s(&v["inclined_force_by_level"], "inclined_force_by_level")?,
        horizontal_force_by_level: d.f64s(&v["horizontal_force_by_level"], "horizontal_force_by_level")?,
        support_vertical_reaction: d.f64s(&v["support_vertical_reaction"], "support_vertical_reaction")?,
        support_horizontal_reaction: d.f64s(&v["support_horizontal_reaction"], "support_horizontal_reaction")?,
        delta: d.f64s(&v["delta"], "delta")?,
        stiffness: d.f64s(&v["stiffness"], "stiffness")?,
        epsilon: d.f64s(&v["epsilon"], "epsilon")?,
        mu: d.f64s(&v["mu"], "mu")?,
    })
}

pub fn solution_to_json(solution: &FemSolution) -> Value {
    let mut v = header("fem_solution");
    v["displacements"] = json!(solution.displacements);
    v["axial_forces"] = json!(solution.axial_forces);
    v["support_reactions"] = json!(solution.support_reactions);
    v["equilibrium_residual"] = json!(solution.equilibrium_residual);
    v
}

pub fn report_to_json(report: &ComparisonReport, extra: &[(&str, f64, f64, bool)]) -> Value {
    let mut v = header("comparison");
    let mut categories: Vec<Value> = report
        .categories
        .iter()
        .map(|c| {
            json!({
                "name": c.name,
                "max_abs": c.max_abs,
                "max_rel": c.max_rel,
                "worst": c.worst,
                "count": c.count,
                "passed": c.passed,
            })
        })
        .collect();
    for (name, max_abs, tol, passed) in extra {
        categories.push(json!({"name": name, "max_abs": max_abs, "tolerance": tol, "passed": passed}));
    }
    v["categories"] = json!(categories);
    v["equilibrium_residual"] = json!(report.equilibrium_residual);
    v["passed"] = json!(report.passed && extra.iter().all(|e| e.3));
    v
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    CliError::Parse {
        path: path.to_owned(),
        message: e.to_string(),
    }
}

/// One row per support: position, settlement, stiffness and reactions.
pub fn write_supports_csv(path: &Path, topology: &Topology, result: &AnalysisResult) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record([
        "support",
        "x_mm",
        "delta",
        "settlement_mm",
        "stiffness_kn_per_mm",
        "reaction_vertical_kn",
        "reaction_horizontal_kn",
    ])
    .map_err(|e| csv_error(path, e))?;
    for (k, s) in topology.supports.iter().enumerate() {
        let d = result.delta[k];
        w.write_record([
            s.id.0.to_string(),
            fmt_f64(topology.nodes[s.node].x),
            fmt_f64(d),
            fmt_f64(d * result.height),
            fmt_f64(result.stiffness[k]),
            fmt_f64(result.support_vertical_reaction[k]),
            fmt_f64(result.support_horizontal_reaction[k]),
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// One row per node: position and closed-form displacements.
pub fn write_nodes_csv(path: &Path, topology: &Topology, result: &AnalysisResult) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record([
        "index", "level", "ordinal", "x_mm", "y_mm", "epsilon", "mu", "v_mm", "u_mm",
    ])
    .map_err(|e| csv_error(path, e))?;
    for (k, id) in node_ids(topology.levels).enumerate() {
        let n = &topology.nodes[k];
        w.write_record([
            k.to_string(),
            id.level.to_string(),
            id.ordinal.to_string(),
            fmt_f64(n.x),
            fmt_f64(n.y),
            fmt_f64(result.epsilon[k]),
            fmt_f64(result.mu[k]),
            fmt_f64(result.epsilon[k] * result.height),
            fmt_f64(result.mu[k] * result.height),
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;
    use quasi_sierpinski::closed_form::{analyze, pvw_residuals, AnalysisOptions};
    use quasi_sierpinski::structure::build_topology;

    fn worked() -> RunConfig {
        RunConfig::from_json_str(include_str!("../examples/worked_example.json")).unwrap()
    }

    fn reparse(v: &Value) -> Value {
        serde_json::from_str(&to_canonical_string(v)).unwrap()
    }

    #[test]
    fn topology_round_trip() {
        let t = build_topology(&worked().structure).unwrap();
        let back = topology_from_json(&reparse(&topology_to_json(&t)), Path::new("t.json")).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn analysis_round_trip() {
        let c = worked().structure;
        let r = analyze(&c, AnalysisOptions::default()).unwrap();
        let res = pvw_residuals(&c, &r.delta).unwrap();
        let back = analysis_from_json(&reparse(&analysis_to_json(&r, &res)), Path::new("a.json")).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn wrong_kind_is_rejected() {
        let c = worked().structure;
        let r = analyze(&c, AnalysisOptions::default()).unwrap();
        let v = analysis_to_json(&r, &[]);
        assert!(topology_from_json(&v, Path::new("a.json")).is_err());
        let mut v = topology_to_json(&build_topology(&c).unwrap());
        v["nodes"][3]["x"] = json!("left");
        let err = topology_from_json(&v, Path::new("t.json")).unwrap_err();
        assert!(err.to_string().contains("nodes[3]"));
    }
}
