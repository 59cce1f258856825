//! Run configuration files.
//!
//! A config is one JSON object. Structure fields:
//!
//! | key | meaning |
//! |---|---|
//! | `levels` | number of levels `N >= 2` |
//! | `beta_tan` / `beta_rad` | inclination; `beta_tan` wins if both are given |
//! | `height` | mm |
//! | `load` | apex load, kN |
//! | `area_inclined`, `modulus_inclined` | mm², kN/mm² |
//! | `area_horizontal`, `modulus_horizontal` | mm², kN/mm² |
//! | `ratios_inclined` | `N` ratios, first equal to 1 |
//! | `ratios_horizontal` | `N − 1` ratios, first equal to 1 |
//! | `boundary` | `{z1, z2, d1, d2}`, settlements per unit height |
//!
//! Optional: `extension` (`{"kind": "geometric", "ratio": r,
//! "first_exponent": e}` or `{"kind": "list", "values": [...]}`),
//! `output_dir`, `tolerances` (`{closed_form, fem}`), `plot` (`{what,
//! depth, samples_log2, magnify, ratio}`), `allow_nonnegative_delta`,
//! and free-text `name` / `description`.
//!
//! Parsing collects every problem before failing, each tagged with its key.

use std::path::{Path, PathBuf};

use quasi_sierpinski::fem::Tolerances;
use quasi_sierpinski::fractal::{Extension, RatioKind, RatioSequence};
use quasi_sierpinski::structure::{Boundary, Inclination, Section, StructureConfig};
use quasi_sierpinski::{ConfigIssue, Error as CoreError};
use serde_json::{json, Map, Value};

use crate::error::CliError;
use crate::plot::PlotKind;

pub const DEFAULT_SAMPLES_LOG2: u32 = 12;
pub const DEFAULT_DEPTH: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct PlotOptions {
    pub what: Option<PlotKind>,
    /// Series depth for non-dyadic samples.
    pub depth: usize,
    /// `2^samples_log2 + 1` uniform samples on `[0, 1]`.
    pub samples_log2: u32,
    pub magnify: f64,
    /// Geometric ratio for the `takagi`, `j` and `cantor` curves.
    pub ratio: Option<f64>,
}

impl Default for PlotOptions {
    fn default() -> Self {
        Self {
            what: None,
            depth: DEFAULT_DEPTH,
            samples_log2: DEFAULT_SAMPLES_LOG2,
            magnify: 1.0,
            ratio: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub name: Option<String>,
    pub structure: StructureConfig,
    /// Extension of the horizontal ratios past `ρ^H_N`.
    pub extension: Extension,
    pub output_dir: Option<PathBuf>,
    pub tolerances: Tolerances,
    pub plot: PlotOptions,
    pub allow_nonnegative_delta: bool,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json_str(&text).map_err(|e| match e {
            CliError::Parse { message, .. } => CliError::Parse {
                path: path.to_owned(),
                message,
            },
            other => other,
        })
    }

    pub fn from_json_str(text: &str) -> Result<Self, CliError> {
        let value: Value = serde_json::from_str(text).map_err(|e| CliError::Parse {
            path: PathBuf::from("<config>"),
            message: e.to_string(),
        })?;
        Self::from_value(&value)
    }

    pub fn from_value(value: &Value) -> Result<Self, CliError> {
        let Some(obj) = value.as_object() else {
            return Err(CliError::Validation(vec![ConfigIssue::new(
                "",
                "config must be a JSON object",
            )]));
        };
        let mut r = Reader::default();
        r.reject_unknown(
            obj,
            "",
            &[
                "name",
                "description",
                "levels",
                "beta_tan",
                "beta_rad",
                "height",
                "load",
                "area_inclined",
                "modulus_inclined",
                "area_horizontal",
                "modulus_horizontal",
                "ratios_inclined",
                "ratios_horizontal",
                "boundary",
                "extension",
                "output_dir",
                "tolerances",
                "plot",
                "allow_nonnegative_delta",
            ],
        );

        let name = r.opt_string(obj, "name");
        let levels = r.uint(obj, "levels");
        let inclination = r.inclination(obj);
        let height = r.number(obj, "height");
        let load = r.number(obj, "load");
        let area_i = r.number(obj, "area_inclined");
        let modulus_i = r.number(obj, "modulus_inclined");
        let area_h = r.number(obj, "area_horizontal");
        let modulus_h = r.number(obj, "modulus_horizontal");
        let ratios_i = r.ratios(obj, "ratios_inclined", RatioKind::Inclined);
        let ratios_h = r.ratios(obj, "ratios_horizontal", RatioKind::Horizontal);
        let boundary = r.boundary(obj);
        let extension = r.extension(obj);
        let output_dir = r.opt_string(obj, "output_dir").map(PathBuf::from);
        let tolerances = r.tolerances(obj);
        let plot = r.plot(obj);
        let allow_nonnegative_delta = r.opt_bool(obj, "allow_nonnegative_delta").unwrap_or(false);

        // Keep validating with stand-ins for fields that already failed, so
        // every problem is reported in one pass; issues on a stand-in are
        // dropped below.
        let Some(levels) = levels else {
            return Err(CliError::Validation(r.issues));
        };
        let flagged: Vec<String> = r.issues.iter().map(|i| i.field.clone()).collect();
        let stand_in = |kind, len: usize| {
            RatioSequence::new(kind, vec![1.0; len.max(1)], Extension::None).expect("ones are valid ratios")
        };
        let complete = [height, load, area_i, modulus_i, area_h, modulus_h]
            .iter()
            .all(Option::is_some)
            && inclination.is_some()
            && ratios_i.is_some()
            && ratios_h.is_some()
            && boundary.is_some();
        let structure = StructureConfig {
            levels,
            inclination: inclination.unwrap_or_else(|| Inclination::from_tan(1.0).expect("45 degrees is valid")),
            height: height.unwrap_or(1.0),
            load: load.unwrap_or(1.0),
            inclined: Section::new(area_i.unwrap_or(1.0), modulus_i.unwrap_or(1.0)),
            horizontal: Section::new(area_h.unwrap_or(1.0), modulus_h.unwrap_or(1.0)),
            ratios_inclined: ratios_i.unwrap_or_else(|| stand_in(RatioKind::Inclined, levels)),
            ratios_horizontal: ratios_h.unwrap_or_else(|| stand_in(RatioKind::Horizontal, levels.saturating_sub(1))),
            boundary: boundary.unwrap_or(Boundary {
                z1: 1,
                z2: 2,
                d1: -1.0,
                d2: -1.0,
            }),
        };
        if let Err(e) = structure.validate() {
            let before = r.issues.len();
            r.absorb(e);
            let fresh = r.issues.split_off(before);
            r.issues.extend(fresh.into_iter().filter(|i| {
                !flagged.iter().any(|f| {
                    i.field == *f
                        || i.field.starts_with(&format!("{f}["))
                        || f.starts_with(&format!("{}[", i.field))
                        || (f == "beta_tan" || f == "beta_rad") && i.field == "beta"
                })
            }));
        }
        if !complete || !r.issues.is_empty() {
            return Err(CliError::Validation(r.issues));
        }
        Ok(Self {
            name,
            structure,
            extension: extension.unwrap_or(Extension::None),
            output_dir,
            tolerances,
            plot,
            allow_nonnegative_delta,
        })
    }

    /// Horizontal ratios with the configured extension, or a constant
    /// continuation of ones when none is given.
    pub fn extended_horizontal_ratios(&self) -> Result<RatioSequence, CliError> {
        let ext = match &self.extension {
            Extension::None => Extension::GeometricTail {
                ratio: 1.0,
                first_exponent: 0,
            },
            other => other.clone(),
        };
        Ok(self.structure.ratios_horizontal.with_extension(ext)?)
    }

    pub fn to_json(&self) -> Value {
        let s = &self.structure;
        let mut v = json!({
            "levels": s.levels,
            "beta_tan": s.inclination.tan(),
            "height": s.height,
            "load": s.load,
            "area_inclined": s.inclined.area,
            "modulus_inclined": s.inclined.modulus,
            "area_horizontal": s.horizontal.area,
            "modulus_horizontal": s.horizontal.modulus,
            "ratios_inclined": s.ratios_inclined.finite(),
            "ratios_horizontal": s.ratios_horizontal.finite(),
            "boundary": {
                "z1": s.boundary.z1,
                "z2": s.boundary.z2,
                "d1": s.boundary.d1,
                "d2": s.boundary.d2,
            },
            "tolerances": {
                "closed_form": self.tolerances.closed_form,
                "fem": self.tolerances.fem,
            },
            "allow_nonnegative_delta": self.allow_nonnegative_delta,
        });
        if let Some(name) = &self.name {
            v["name"] = json!(name);
        }
        match &self.extension {
            Extension::None => {}
            Extension::ExplicitList(values) => v["extension"] = json!({"kind": "list", "values": values}),
            Extension::GeometricTail { ratio, first_exponent } => {
                v["extension"] = json!({"kind": "geometric", "ratio": ratio, "first_exponent": first_exponent})
            }
        }
        v
    }
}

#[derive(Default)]
struct Reader {
    issues: Vec<ConfigIssue>,
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_owned()
    } else {
        format!("{prefix}.{key}")
    }
}

impl Reader {
    fn push(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.issues.push(ConfigIssue::new(field, message));
    }

    fn absorb(&mut self, e: CoreError) {
        match e {
            CoreError::Validation(v) => {
                for issue in v.issues {
                    if !self.issues.contains(&issue) {
                        self.issues.push(issue);
                    }
                }
            }
            other => self.push("", other.to_string()),
        }
    }

    fn reject_unknown(&mut self, obj: &Map<String, Value>, prefix: &str, known: &[&str]) {
        for key in obj.keys() {
            if !known.contains(&key.as_str()) {
                self.push(join(prefix, key), "unknown key");
            }
        }
    }

    fn number_at(&mut self, obj: &Map<String, Value>, prefix: &str, key: &str, required: bool) -> Option<f64> {
        let field = join(prefix, key);
        match obj.get(key) {
            None | Some(Value::Null) => {
                if required {
                    self.push(field, "missing required number");
                }
                None
            }
            Some(v) => match v.as_f64() {
                Some(x) => Some(x),
                None => {
                    self.push(field, format!("expected a number, got {v}"));
                    None
                }
            },
        }
    }

    fn number(&mut self, obj: &Map<String, Value>, key: &str) -> Option<f64> {
        self.number_at(obj, "", key, true)
    }

    fn uint_at(&mut self, obj: &Map<String, Value>, prefix: &str, key: &str, required: bool) -> Option<usize> {
        let field = join(prefix, key);
        match obj.get(key) {
            None | Some(Value::Null) => {
                if required {
                    self.push(field, "missing required integer");
                }
                None
            }
            Some(v) => match v.as_u64() {
                Some(x) => Some(x as usize),
                None => {
                    self.push(field, format!("expected a non-negative integer, got {v}"));
                    None
                }
            },
        }
    }

    fn uint(&mut self, obj: &Map<String, Value>, key: &str) -> Option<usize> {
        self.uint_at(obj, "", key, true)
    }

    fn opt_string(&mut self, obj: &Map<String, Value>, key: &str) -> Option<String> {
        match obj.get(key) {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(v) => {
                self.push(key, format!("expected a string, got {v}"));
                None
            }
        }
    }

    fn opt_bool(&mut self, obj: &Map<String, Value>, key: &str) -> Option<bool> {
        match obj.get(key) {
            None | Some(Value::Null) => None,
            Some(Value::Bool(b)) => Some(*b),
            Some(v) => {
                self.push(key, format!("expected true or false, got {v}"));
                None
            }
        }
    }

    fn object<'a>(&mut self, obj: &'a Map<String, Value>, key: &str, required: bool) -> Option<&'a Map<String, Value>> {
        match obj.get(key) {
            None | Some(Value::Null) => {
                if required {
                    self.push(key, "missing required object");
                }
                None
            }
            Some(Value::Object(m)) => Some(m),
            Some(v) => {
                self.push(key, format!("expected an object, got {v}"));
                None
            }
        }
    }

    fn number_list(&mut self, value: &Value, field: &str) -> Option<Vec<f64>> {
        let Some(items) = value.as_array() else {
            self.push(field, format!("expected an array of numbers, got {value}"));
            return None;
        };
        let mut out = Vec::with_capacity(items.len());
        let mut ok = true;
        for (k, item) in items.iter().enumerate() {
            match item.as_f64() {
                Some(x) => out.push(x),
                None => {
                    self.push(format!("{field}[{k}]"), format!("expected a number, got {item}"));
                    ok = false;
                }
            }
        }
        ok.then_some(out)
    }

    fn inclination(&mut self, obj: &Map<String, Value>) -> Option<Inclination> {
        let tan = self.number_at(obj, "", "beta_tan", false);
        let rad = self.number_at(obj, "", "beta_rad", false);
        let (field, result) = match (tan, rad) {
            (Some(t), _) => ("beta_tan", Inclination::from_tan(t)),
            (None, Some(b)) => ("beta_rad", Inclination::from_radians(b)),
            (None, None) => {
                if !obj.contains_key("beta_tan") && !obj.contains_key("beta_rad") {
                    self.push("beta_tan", "one of beta_tan or beta_rad is required");
                }
                return None;
            }
        };
        match result {
            Ok(i) => Some(i),
            Err(e) => {
                self.push(field, e.to_string());
                None
            }
        }
    }

    fn ratios(&mut self, obj: &Map<String, Value>, key: &str, kind: RatioKind) -> Option<RatioSequence> {
        let Some(value) = obj.get(key) else {
            self.push(key, "missing required ratio list");
            return None;
        };
        let list = self.number_list(value, key)?;
        match RatioSequence::new(kind, list, Extension::None) {
            Ok(r) => Some(r),
            Err(e) => {
                self.absorb(e);
                None
            }
        }
    }

    fn boundary(&mut self, obj: &Map<String, Value>) -> Option<Boundary> {
        let b = self.object(obj, "boundary", true)?;
        self.reject_unknown(b, "boundary", &["z1", "z2", "d1", "d2"]);
        let z1 = self.uint_at(b, "boundary", "z1", true);
        let z2 = self.uint_at(b, "boundary", "z2", true);
        let d1 = self.number_at(b, "boundary", "d1", true);
        let d2 = self.number_at(b, "boundary", "d2", true);
        Some(Boundary {
            z1: z1?,
            z2: z2?,
            d1: d1?,
            d2: d2?,
        })
    }

    fn extension(&mut self, obj: &Map<String, Value>) -> Option<Extension> {
        let e = self.object(obj, "extension", false)?;
        let kind = match e.get("kind") {
            Some(Value::String(s)) => s.as_str(),
            other => {
                self.push(
                    "extension.kind",
                    format!("expected \"geometric\" or \"list\", got {other:?}"),
                );
                return None;
            }
        };
        let ext = match kind {
            "geometric" => {
                self.reject_unknown(e, "extension", &["kind", "ratio", "first_exponent"]);
                let ratio = self.number_at(e, "extension", "ratio", true)?;
                let first_exponent = self.uint_at(e, "extension", "first_exponent", false).unwrap_or(1) as u32;
                Extension::GeometricTail { ratio, first_exponent }
            }
            "list" => {
                self.reject_unknown(e, "extension", &["kind", "values"]);
                let Some(values) = e.get("values") else {
                    self.push("extension.values", "missing ratio list");
                    return None;
                };
                Extension::ExplicitList(self.number_list(values, "extension.values")?)
            }
            other => {
                self.push(
                    "extension.kind",
                    format!("expected \"geometric\" or \"list\", got \"{other}\""),
                );
                return None;
            }
        };
        // validates the tail on its own, against a trivial finite part
        if let Err(e) = RatioSequence::new(RatioKind::Horizontal, vec![1.0], ext.clone()) {
            self.absorb(e);
            return None;
        }
        Some(ext)
    }

    fn tolerances(&mut self, obj: &Map<String, Value>) -> Tolerances {
        let mut tol = Tolerances::default();
        if let Some(t) = self.object(obj, "tolerances", false) {
            self.reject_unknown(t, "tolerances", &["closed_form", "fem"]);
            for (key, slot) in [("closed_form", &mut tol.closed_form), ("fem", &mut tol.fem)] {
                if let Some(x) = self.number_at(t, "tolerances", key, false) {
                    if x.is_finite() && x > 0.0 {
                        *slot = x;
                    } else {
                        self.push(format!("tolerances.{key}"), format!("must be > 0, got {x}"));
                    }
                }
            }
        }
        tol
    }

    fn plot(&mut self, obj: &Map<String, Value>) -> PlotOptions {
        let mut p = PlotOptions::default();
        let Some(m) = self.object(obj, "plot", false) else {
            return p;
        };
        self.reject_unknown(m, "plot", &["what", "depth", "samples_log2", "magnify", "ratio"]);
        match m.get("what") {
            None | Some(Value::Null) => {}
            Some(Value::String(s)) => match s.parse() {
                Ok(kind) => p.what = Some(kind),
                Err(e) => self.push("plot.what", e),
            },
            Some(v) => self.push("plot.what", format!("expected a string, got {v}")),
        }
        if let Some(d) = self.uint_at(m, "plot", "depth", false) {
            p.depth = d;
        }
        if let Some(s) = self.uint_at(m, "plot", "samples_log2", false) {
            if (1..=20).contains(&s) {
                p.samples_log2 = s as u32;
            } else {
                self.push("plot.samples_log2", format!("must lie in 1..=20, got {s}"));
            }
        }
        if let Some(x) = self.number_at(m, "plot", "magnify", false) {
            if x.is_finite() && x > 0.0 {
                p.magnify = x;
            } else {
                self.push("plot.magnify", format!("must be > 0, got {x}"));
            }
        }
        p.ratio = self.number_at(m, "plot", "ratio", false);
        p
    }
}
