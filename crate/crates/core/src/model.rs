//! Shared classifier interface and the versioned text model format.
//!
//! ```text
//! format_version 1
//! kind kernel | linear
//! variant svm | odml | odm
//! kernel linear | rbf
//! width <f64>                       (0 for the linear kernel)
//! <param> <f64>                     (c | lambda1 lambda2 | c1 c2 d)
//! normalizer <count>
//! range <index> <min> <max>         (count lines)
//! bias <index> <value>              (optional)
//! m_train <usize>
//! objective <f64>
//! passes <usize> / stages <usize>
//! converged true|false              (kernel only)
//! dim <usize>                       (linear only)
//! m_support <usize>
//! theta <f64> <idx:val ...>         (kernel, m_support lines)
//! w <index> <value>                 (linear, m_support nonzero lines)
//! alpha <value> <curvature>         (optional, kernel only)
//! ```
//!
//! Floats are written in shortest round-trip form, so a reloaded model
//! reproduces decision values bit for bit.

use std::collections::HashMap;
use std::path::Path;

use crate::data::{parse_entries, Normalizer, SparseVector};
use crate::error::{OdmError, Result};
use crate::kernel::KernelSpec;
use crate::odm_dual::{BoundData, FeatureMap, OdmParams, OdmlParams, Params, TrainSummary, TrainedModel, Variant};
use crate::odm_linear::{LinearModel, LinearSummary};

pub const FORMAT_VERSION: u32 = 1;

/// Anything that produces a real-valued decision for a raw instance.
pub trait Classifier {
    fn decision(&self, z: &SparseVector) -> f64;

    /// `‖w‖` in the feature space of the decision function.
    fn weight_norm(&self) -> f64;

    /// Ties (decision exactly 0) go to +1.
    fn predict_label(&self, z: &SparseVector) -> f64 {
        if self.decision(z) >= 0.0 {
            1.0
        } else {
            -1.0
        }
    }
}

impl Classifier for TrainedModel {
    fn decision(&self, z: &SparseVector) -> f64 {
        TrainedModel::decision(self, z)
    }

    fn weight_norm(&self) -> f64 {
        TrainedModel::weight_norm(self)
    }
}

impl Classifier for LinearModel {
    fn decision(&self, z: &SparseVector) -> f64 {
        LinearModel::decision(self, z)
    }

    fn weight_norm(&self) -> f64 {
        LinearModel::weight_norm(self)
    }
}

/// Either model family, as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Kernel(TrainedModel),
    Linear(LinearModel),
}

impl Model {
    pub fn params(&self) -> &Params {
        match self {
            Model::Kernel(m) => &m.params,
            Model::Linear(m) => &m.params,
        }
    }

    pub fn variant(&self) -> Variant {
        self.params().variant()
    }

    pub fn kernel(&self) -> KernelSpec {
        match self {
            Model::Kernel(m) => m.kernel,
            Model::Linear(_) => KernelSpec::Linear,
        }
    }

    pub fn features(&self) -> &FeatureMap {
        match self {
            Model::Kernel(m) => &m.features,
            Model::Linear(m) => &m.features,
        }
    }

    pub fn support_count(&self) -> usize {
        match self {
            Model::Kernel(m) => m.support.len(),
            Model::Linear(m) => m.w.iter().filter(|v| **v != 0.0).count(),
        }
    }

    pub fn objective(&self) -> f64 {
        match self {
            Model::Kernel(m) => m.summary.objective,
            Model::Linear(m) => m.summary.objective,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = Vec::new();
        out.push(format!("format_version {FORMAT_VERSION}"));
        out.push(format!("kind {}", if matches!(self, Model::Kernel(_)) { "kernel" } else { "linear" }));
        out.push(format!("variant {}", self.variant().name()));
        let kernel = self.kernel();
        out.push(format!("kernel {}", kernel.name()));
        out.push(format!("width {:?}", if let KernelSpec::Rbf { width } = kernel { width } else { 0.0 }));
        for (name, v) in self.params().named_values() {
            out.push(format!("{name} {v:?}"));
        }
        let features = self.features();
        let ranges = features.normalizer.as_ref().map_or(&[][..], |n| n.ranges());
        out.push(format!("normalizer {}", ranges.len()));
        for (k, (lo, hi)) in ranges.iter().enumerate() {
            out.push(format!("range {} {lo:?} {hi:?}", k + 1));
        }
        if let Some((idx, v)) = features.bias {
            out.push(format!("bias {idx} {v:?}"));
        }
        match self {
            Model::Kernel(m) => {
                out.push(format!("m_train {}", m.summary.m_train));
                out.push(format!("objective {:?}", m.summary.objective));
                out.push(format!("passes {}", m.summary.passes));
                out.push(format!("converged {}", m.summary.converged));
                out.push(format!("m_support {}", m.support.len()));
                for (x, t) in &m.support {
                    let entries = x.to_libsvm_entries();
                    if entries.is_empty() {
                        out.push(format!("theta {t:?}"));
                    } else {
                        out.push(format!("theta {t:?} {entries}"));
                    }
                }
                if let Some(b) = &m.bound_data {
                    for (a, c) in b.alpha.iter().zip(b.curvature.iter().cycle()) {
                        out.push(format!("alpha {a:?} {c:?}"));
                    }
                }
            }
            Model::Linear(m) => {
                out.push(format!("m_train {}", m.summary.m_train));
                out.push(format!("objective {:?}", m.summary.objective));
                out.push(format!("stages {}", m.summary.stages));
                out.push(format!("dim {}", m.w.len()));
                out.push(format!("m_support {}", self.support_count()));
                for (k, v) in m.w.iter().enumerate().filter(|(_, v)| **v != 0.0) {
                    out.push(format!("w {} {v:?}", k + 1));
                }
            }
        }
        out.push(String::new());
        out.join("\n")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Model> {
        Model::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn from_text(text: &str) -> Result<Model> {
        let err = |msg: String| OdmError::ModelFormat(msg);
        let mut header: HashMap<&str, &str> = HashMap::new();
        let mut ranges = Vec::new();
        let mut support = Vec::new();
        let mut alpha = Vec::new();
        let mut curvature = Vec::new();
        let mut weights = Vec::new();
        let mut bias = None;
        let num = |s: &str, line: usize| -> Result<f64> {
            s.parse::<f64>().map_err(|_| err(format!("line {line}: bad number '{s}'")))
        };
        for (k, line) in text.lines().enumerate() {
            let lineno = k + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
            let fields: Vec<&str> = rest.split_whitespace().collect();
            match key {
                "range" => {
                    if fields.len() != 3 {
                        return Err(err(format!("line {lineno}: range needs index, min, max")));
                    }
                    ranges.push((num(fields[1], lineno)?, num(fields[2], lineno)?));
                }
                "bias" => {
                    if fields.len() != 2 {
                        return Err(err(format!("line {lineno}: bias needs index and value")));
                    }
                    let idx = fields[0].parse().map_err(|_| err(format!("line {lineno}: bad bias index")))?;
                    bias = Some((idx, num(fields[1], lineno)?));
                }
                "theta" => {
                    let t = num(fields.first().copied().unwrap_or(""), lineno)?;
                    let x = parse_entries(fields.iter().skip(1).copied()).map_err(|e| err(format!("line {lineno}: {e}")))?;
                    support.push((x, t));
                }
                "alpha" => {
                    if fields.len() != 2 {
                        return Err(err(format!("line {lineno}: alpha needs value and curvature")));
                    }
                    alpha.push(num(fields[0], lineno)?);
                    curvature.push(num(fields[1], lineno)?);
                }
                "w" => {
                    if fields.len() != 2 {
                        return Err(err(format!("line {lineno}: w needs index and value")));
                    }
                    let idx: usize = fields[0].parse().map_err(|_| err(format!("line {lineno}: bad weight index")))?;
                    weights.push((idx, num(fields[1], lineno)?));
                }
                _ => {
                    if header.insert(key, rest.trim()).is_some() {
                        return Err(err(format!("line {lineno}: duplicate key '{key}'")));
                    }
                }
            }
        }
        let get = |k: &str| header.get(k).copied().ok_or_else(|| err(format!("missing key '{k}'")));
        let getf = |k: &str| get(k).and_then(|v| v.parse::<f64>().map_err(|_| err(format!("bad value for '{k}'"))));
        let getu = |k: &str| get(k).and_then(|v| v.parse::<usize>().map_err(|_| err(format!("bad value for '{k}'"))));

        let version: u32 = get("format_version")?.parse().map_err(|_| err("bad format_version".into()))?;
        if version != FORMAT_VERSION {
            return Err(err(format!("unsupported format_version {version}")));
        }
        let variant: Variant = get("variant")?.parse()?;
        let params = match variant {
            Variant::Svm => Params::Svm { c: getf("c")? },
            Variant::Odml => Params::Odml(OdmlParams::new(getf("c")?, getf("lambda1")?, getf("lambda2")?)?),
            Variant::Odm => Params::Odm(OdmParams::new(getf("c1")?, getf("c2")?, getf("d")?)?),
        };
        params.validate()?;
        let kernel = match get("kernel")? {
            "linear" => KernelSpec::Linear,
            "rbf" => KernelSpec::rbf(getf("width")?)?,
            other => return Err(err(format!("unknown kernel '{other}'"))),
        };
        if getu("normalizer")? != ranges.len() {
            return Err(err("normalizer count does not match range lines".into()));
        }
        let normalizer = if ranges.is_empty() { None } else { Some(Normalizer::from_ranges(ranges)?) };
        let features = FeatureMap { normalizer, bias };
        let m_support = getu("m_support")?;
        let m_train = getu("m_train")?;
        let objective = getf("objective")?;

        match get("kind")? {
            "kernel" => {
                if support.len() != m_support {
                    return Err(err(format!("m_support {m_support} but {} theta lines", support.len())));
                }
                // ODM stores 2m alphas against m curvatures, written cyclically
                if variant == Variant::Odm {
                    curvature.truncate(alpha.len() / 2);
                }
                let bound_data = (!alpha.is_empty()).then_some(BoundData { alpha, curvature });
                let converged = match get("converged")? {
                    "true" => true,
                    "false" => false,
                    other => return Err(err(format!("bad converged flag '{other}'"))),
                };
                Ok(Model::Kernel(TrainedModel {
                    params,
                    kernel,
                    support,
                    features,
                    summary: TrainSummary { m_train, objective, passes: getu("passes")?, converged },
                    bound_data,
                }))
            }
            "linear" => {
                let dim = getu("dim")?;
                if weights.len() != m_support {
                    return Err(err(format!("m_support {m_support} but {} w lines", weights.len())));
                }
                let mut w = vec![0.0; dim];
                for (idx, v) in weights {
                    if idx == 0 || idx > dim {
                        return Err(err(format!("weight index {idx} outside 1..={dim}")));
                    }
                    w[idx - 1] = v;
                }
                Ok(Model::Linear(LinearModel {
                    w,
                    params,
                    features,
                    summary: LinearSummary { m_train, objective, stages: getu("stages")? },
                }))
            }
            other => Err(err(format!("unknown model kind '{other}'"))),
        }
    }
}

impl Classifier for Model {
    fn decision(&self, z: &SparseVector) -> f64 {
        match self {
            Model::Kernel(m) => m.decision(z),
            Model::Linear(m) => m.decision(z),
        }
    }

    fn weight_norm(&self) -> f64 {
        match self {
            Model::Kernel(m) => m.weight_norm(),
            Model::Linear(m) => m.weight_norm(),
        }
    }
}
