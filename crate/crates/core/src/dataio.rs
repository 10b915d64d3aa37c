//! Dataset loaders, the JSON model format and the lineage CSV report.

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::evolution::GenerationRecord;
use crate::halfprec::{decode_f16, encode_f16, HalfCode, PrecisionPolicy};
use crate::netcore::{Activation, DenseLayer, Network, Precision};

/// Labelled samples with row-major binary32 features.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Vec<f32>,
    pub n_features: usize,
    pub labels: Vec<usize>,
    pub n_classes: usize,
}

impl Dataset {
    pub fn new(features: Vec<f32>, n_features: usize, labels: Vec<usize>, n_classes: usize) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if n_features == 0 || features.len() != labels.len() * n_features {
            return Err(Error::ShapeMismatch {
                expected: labels.len() * n_features,
                got: features.len(),
            });
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= n_classes) {
            return Err(Error::InvalidLabel { label, n_classes });
        }
        if let Some(i) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteFeature {
                row: i / n_features,
                column: i % n_features,
            });
        }
        Ok(Dataset {
            features,
            n_features,
            labels,
            n_classes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn sample(&self, row: usize) -> &[f32] {
        &self.features[row * self.n_features..(row + 1) * self.n_features]
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }
}

/// Reads a headed CSV whose last column is `label`.
///
/// Rows and columns in diagnostics are 1-based, with the header as row 1.
pub fn load_csv_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv_dataset(&text)
}

pub fn parse_csv_dataset(text: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| csv_error(&e, 1))?
        .clone();
    if header.len() < 2 || header.get(header.len() - 1) != Some("label") {
        return Err(Error::Parse {
            row: 1,
            column: header.len(),
            message: "last header column must be `label` after at least one feature".into(),
        });
    }
    let n_features = header.len() - 1;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(&e, labels.len() + 2))?;
        let row = record.position().map_or(labels.len() + 2, |p| p.line() as usize);
        for (c, field) in record.iter().take(n_features).enumerate() {
            let v: f32 = field.parse().map_err(|_| Error::Parse {
                row,
                column: c + 1,
                message: format!("`{field}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFiniteFeature { row, column: c + 1 });
            }
            features.push(v);
        }
        let field = &record[n_features];
        let label: usize = field.parse().map_err(|_| Error::Parse {
            row,
            column: n_features + 1,
            message: format!("label `{field}` is not a non-negative integer"),
        })?;
        labels.push(label);
    }
    let n_classes = labels.iter().max().map(|m| m + 1).ok_or(Error::EmptyDataset)?;
    Dataset::new(features, n_features, labels, n_classes)
}

fn csv_error(e: &csv::Error, fallback_row: usize) -> Error {
    let row = e.position().map_or(fallback_row, |p| p.line() as usize);
    Error::Parse {
        row,
        column: 0,
        message: e.to_string(),
    }
}

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

fn be_u32(bytes: &[u8], offset: usize, path: &Path) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::TruncatedFile(path.to_path_buf()))
}

/// Loads an IDX image/label pair, scaling pixels to `[0, 1]`.
pub fn load_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>, limit: Option<usize>) -> Result<Dataset> {
    let (ip, lp) = (images_path.as_ref(), labels_path.as_ref());
    let images = fs::read(ip).map_err(|e| Error::io(ip, e))?;
    let labels = fs::read(lp).map_err(|e| Error::io(lp, e))?;
    parse_idx(&images, ip, &labels, lp, limit)
}

fn parse_idx(images: &[u8], ip: &Path, labels: &[u8], lp: &Path, limit: Option<usize>) -> Result<Dataset> {
    let magic = be_u32(images, 0, ip)?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(Error::BadMagic {
            path: ip.to_path_buf(),
            expected: IDX_IMAGES_MAGIC,
            found: magic,
        });
    }
    let magic = be_u32(labels, 0, lp)?;
    if magic != IDX_LABELS_MAGIC {
        return Err(Error::BadMagic {
            path: lp.to_path_buf(),
            expected: IDX_LABELS_MAGIC,
            found: magic,
        });
    }
    let n_images = be_u32(images, 4, ip)? as usize;
    let rows = be_u32(images, 8, ip)? as usize;
    let cols = be_u32(images, 12, ip)? as usize;
    let n_labels = be_u32(labels, 4, lp)? as usize;
    if n_images != n_labels {
        return Err(Error::CountMismatch {
            images: n_images,
            labels: n_labels,
        });
    }
    let pixels = rows * cols;
    if images.len() < 16 + n_images * pixels {
        return Err(Error::TruncatedFile(ip.to_path_buf()));
    }
    if labels.len() < 8 + n_labels {
        return Err(Error::TruncatedFile(lp.to_path_buf()));
    }
    let n = limit.map_or(n_images, |l| l.min(n_images));
    let features = images[16..16 + n * pixels].iter().map(|&b| b as f32 / 255.0).collect();
    let labels: Vec<usize> = labels[8..8 + n].iter().map(|&b| b as usize).collect();
    let n_classes = labels.iter().max().map(|m| m + 1).ok_or(Error::EmptyDataset)?;
    Dataset::new(features, pixels, labels, n_classes)
}

/// Two unit-variance isotropic Gaussian classes centred at `∓separation/2`
/// on feature 0. Samples alternate class 0, class 1, ...
pub fn synth_gaussians(n_per_class: usize, n_features: usize, separation: f64, seed: u64) -> Result<Dataset> {
    if n_per_class == 0 || n_features == 0 || !(separation > 0.0 && separation.is_finite()) {
        return Err(Error::InvalidParam(format!(
            "synthetic dataset needs n_per_class ≥ 1, n_features ≥ 1, separation > 0 \
             (got {n_per_class}, {n_features}, {separation})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(2 * n_per_class * n_features);
    let mut labels = Vec::with_capacity(2 * n_per_class);
    for _ in 0..n_per_class {
        for class in 0..2 {
            let centre = if class == 0 { -separation / 2.0 } else { separation / 2.0 };
            for f in 0..n_features {
                let noise: f64 = StandardNormal.sample(&mut rng);
                let shift = if f == 0 { centre } else { 0.0 };
                features.push((shift + noise) as f32);
            }
            labels.push(class);
        }
    }
    Dataset::new(features, n_features, labels, 2)
}

pub const MODEL_FORMAT_VERSION: u64 = 1;

/// How a generation's validation rows were drawn, so metrics can be
/// recomputed from a stored model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitInfo {
    pub seed: u64,
    pub validation_fraction: f64,
}

/// Provenance stored alongside the parameters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub seed: u64,
    pub alpha_history: Vec<f64>,
    pub split: Option<SplitInfo>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelDoc {
    format_version: u64,
    generation: u32,
    precision: String,
    activation: Activation,
    layers: Vec<LayerDoc>,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    alpha_history: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    split: Option<SplitInfo>,
}

#[derive(Debug, Serialize, Deserialize)]
struct LayerDoc {
    in_dim: usize,
    out_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    activation: Option<Activation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights_f16: Option<Vec<u16>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bias_f16: Option<Vec<u16>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bias: Option<Vec<f32>>,
    mask: Vec<u8>,
}

const BINARY16: &str = "binary16";
const BINARY32: &str = "binary32";

fn exact_code(v: f32, what: &str) -> Result<u16> {
    let code = encode_f16(v, PrecisionPolicy::SATURATE);
    if decode_f16(code).to_bits() != v.to_bits() {
        return Err(Error::Integrity(format!("{what} {v} is not a binary16 value")));
    }
    Ok(code.bits())
}

/// Serialises a network to the JSON model format.
///
/// Half-precision networks store every parameter as its binary16 bit
/// pattern; full-precision networks use the `binary32` variant with decimal
/// values that parse back to the same bits.
pub fn model_to_json(net: &Network, meta: &ModelMeta) -> Result<String> {
    net.validate()?;
    let half = net.precision == Precision::Half;
    let layers = net
        .layers
        .iter()
        .map(|l| {
            let mask = l.mask.iter().map(|&m| m as u8).collect();
            let mut doc = LayerDoc {
                in_dim: l.in_dim,
                out_dim: l.out_dim,
                activation: Some(l.activation),
                weights_f16: None,
                bias_f16: None,
                weights: None,
                bias: None,
                mask,
            };
            if half {
                doc.weights_f16 = Some(l.weights.iter().map(|&w| exact_code(w, "weight")).collect::<Result<_>>()?);
                doc.bias_f16 = Some(l.bias.iter().map(|&b| exact_code(b, "bias")).collect::<Result<_>>()?);
            } else {
                doc.weights = Some(l.weights.clone());
                doc.bias = Some(l.bias.clone());
            }
            Ok(doc)
        })
        .collect::<Result<Vec<_>>>()?;
    let doc = ModelDoc {
        format_version: MODEL_FORMAT_VERSION,
        generation: net.generation,
        precision: if half { BINARY16 } else { BINARY32 }.into(),
        activation: net.layers[0].activation,
        layers,
        seed: meta.seed,
        alpha_history: meta.alpha_history.clone(),
        split: meta.split,
    };
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Format(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn model_from_json(text: &str) -> Result<(Network, ModelMeta)> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    let version = value
        .get("format_version")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Format("missing integer `format_version`".into()))?;
    if version != MODEL_FORMAT_VERSION {
        return Err(Error::FormatVersionUnsupported(version));
    }
    let doc: ModelDoc = serde_json::from_value(value).map_err(|e| Error::Format(e.to_string()))?;
    let half = match doc.precision.as_str() {
        BINARY16 => true,
        BINARY32 => false,
        other => return Err(Error::Format(format!("unknown precision `{other}`"))),
    };
    if doc.layers.is_empty() {
        return Err(Error::Integrity("model has no layers".into()));
    }

    let mut layers = Vec::with_capacity(doc.layers.len());
    for (i, l) in doc.layers.into_iter().enumerate() {
        let n = l.in_dim * l.out_dim;
        if l.mask.len() != n {
            return Err(Error::Integrity(format!("layer {i}: mask has {} entries, expected {n}", l.mask.len())));
        }
        if let Some(bad) = l.mask.iter().find(|&&m| m > 1) {
            return Err(Error::Integrity(format!("layer {i}: mask entry {bad} is not 0 or 1")));
        }
        let (weights, bias) = if half {
            let (Some(w), Some(b)) = (l.weights_f16, l.bias_f16) else {
                return Err(Error::Format(format!("layer {i}: missing `weights_f16`/`bias_f16`")));
            };
            if let Some(j) = w.iter().zip(&l.mask).position(|(&w, &m)| m == 0 && w != 0) {
                return Err(Error::Integrity(format!(
                    "layer {i}: synapse {j} is masked but its code is 0x{:04X}",
                    w[j]
                )));
            }
            let decode = |codes: Vec<u16>| codes.into_iter().map(|c| decode_f16(HalfCode(c))).collect::<Vec<_>>();
            (decode(w), decode(b))
        } else {
            let (Some(w), Some(b)) = (l.weights, l.bias) else {
                return Err(Error::Format(format!("layer {i}: missing `weights`/`bias`")));
            };
            (w, b)
        };
        if weights.len() != n || bias.len() != l.out_dim {
            return Err(Error::Integrity(format!("layer {i}: parameter counts do not match shape")));
        }
        layers.push(DenseLayer {
            in_dim: l.in_dim,
            out_dim: l.out_dim,
            activation: l.activation.unwrap_or(doc.activation),
            weights,
            mask: l.mask.into_iter().map(|m| m == 1).collect(),
            bias,
        });
    }
    let net = Network {
        layers,
        generation: doc.generation,
        precision: if half { Precision::Half } else { Precision::Full },
    };
    net.validate()?;
    let meta = ModelMeta {
        seed: doc.seed,
        alpha_history: doc.alpha_history,
        split: doc.split,
    };
    Ok((net, meta))
}

pub fn save_model(net: &Network, meta: &ModelMeta, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = model_to_json(net, meta)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<(Network, ModelMeta)> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&text)
}

pub const LINEAGE_HEADER: &str = "generation,alpha,active_synapses,total_synapses,macs,train_loss,precision,recall,f1,seed";

/// Formats a real with 6 significant digits, like C's `%g`.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').unwrap_or((&sci, "0"));
    let exp: i32 = exp.parse().unwrap_or(0);
    if !(-4..6).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (5 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn lineage_to_csv(records: &[GenerationRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(LINEAGE_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.generation,
            format_sig6(r.alpha_used),
            r.active_synapses,
            r.total_synapses,
            r.macs,
            format_sig6(r.train_loss),
            format_sig6(r.precision_metric),
            format_sig6(r.recall_metric),
            format_sig6(r.f1),
            r.seed,
        ));
    }
    out
}

pub fn save_lineage_report(records: &[GenerationRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, lineage_to_csv(records)).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Deserialize)]
struct LineageRow {
    generation: u32,
    alpha: f64,
    active_synapses: usize,
    total_synapses: usize,
    macs: usize,
    train_loss: f64,
    precision: f64,
    recall: f64,
    f1: f64,
    seed: u64,
}

/// Parses a lineage report. `model_path` is not part of the report and is
/// left empty.
pub fn parse_lineage_report(text: &str) -> Result<Vec<GenerationRecord>> {
    let first = text.lines().next().unwrap_or_default();
    if first.trim_end() != LINEAGE_HEADER {
        return Err(Error::Parse {
            row: 1,
            column: 0,
            message: format!("expected header `{LINEAGE_HEADER}`"),
        });
    }
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut records = Vec::new();
    for row in reader.deserialize::<LineageRow>() {
        let row = row.map_err(|e| csv_error(&e, records.len() + 2))?;
        records.push(GenerationRecord {
            generation: row.generation,
            alpha_used: row.alpha,
            active_synapses: row.active_synapses,
            total_synapses: row.total_synapses,
            macs: row.macs,
            train_loss: row.train_loss,
            precision_metric: row.precision,
            recall_metric: row.recall,
            f1: row.f1,
            seed: row.seed,
            model_path: String::new(),
        });
    }
    Ok(records)
}

pub fn load_lineage_report(path: impl AsRef<Path>) -> Result<Vec<GenerationRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_lineage_report(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_basic() {
        let d = parse_csv_dataset("x0,x1,label\n0.5,1.0,0\n-1.0,2.0,1\n").unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.n_features, 2);
        assert_eq!(d.n_classes, 2);
        assert_eq!(d.sample(1), &[-1.0, 2.0]);
        assert_eq!(d.labels, vec![0, 1]);
    }

    #[test]
    fn csv_errors() {
        assert!(matches!(parse_csv_dataset("x0,x1,label\n"), Err(Error::EmptyDataset)));
        match parse_csv_dataset("x0,x1,label\n0.5,1.0,0\nnan,2.0,1\n") {
            Err(Error::NonFiniteFeature { row: 3, column: 1 }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match parse_csv_dataset("x0,x1,label\n0.5,abc,0\n") {
            Err(Error::Parse { row: 2, column: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_csv_dataset("x0,x1,y\n0.5,1.0,0\n"), Err(Error::Parse { row: 1, .. })));
        assert!(matches!(parse_csv_dataset("x0,label\n0.5,-1\n"), Err(Error::Parse { column: 2, .. })));
        assert!(matches!(parse_csv_dataset("x0,label\n0.5,1,4\n"), Err(Error::Parse { .. })));
    }

    fn idx_images(magic: u32, n: u32, rows: u32, cols: u32, pixels: &[u8]) -> Vec<u8> {
        let mut v = Vec::new();
        for x in [magic, n, rows, cols] {
            v.extend_from_slice(&x.to_be_bytes());
        }
        v.extend_from_slice(pixels);
        v
    }

    fn idx_labels(magic: u32, labels: &[u8]) -> Vec<u8> {
        let mut v = magic.to_be_bytes().to_vec();
        v.extend_from_slice(&(labels.len() as u32).to_be_bytes());
        v.extend_from_slice(labels);
        v
    }

    #[test]
    fn idx_parsing() {
        let p = Path::new("mem");
        let imgs = idx_images(0x803, 2, 2, 2, &[0, 255, 0, 255, 255, 0, 255, 0]);
        let labels = idx_labels(0x801, &[0, 1]);
        let d = parse_idx(&imgs, p, &labels, p, None).unwrap();
        assert_eq!(d.sample(0), &[0.0, 1.0, 0.0, 1.0]);
        assert_eq!(d.sample(1), &[1.0, 0.0, 1.0, 0.0]);
        assert_eq!(d.labels, vec![0, 1]);
        assert_eq!(parse_idx(&imgs, p, &labels, p, Some(1)).unwrap().len(), 1);

        let bad = idx_images(0x802, 2, 2, 2, &[0; 8]);
        assert!(matches!(parse_idx(&bad, p, &labels, p, None), Err(Error::BadMagic { found: 0x802, .. })));

        let ten = idx_images(0x803, 10, 1, 1, &[0; 10]);
        let nine = idx_labels(0x801, &[0; 9]);
        assert!(matches!(
            parse_idx(&ten, p, &nine, p, None),
            Err(Error::CountMismatch { images: 10, labels: 9 })
        ));

        let short = idx_images(0x803, 2, 2, 2, &[0; 5]);
        assert!(matches!(parse_idx(&short, p, &labels, p, None), Err(Error::TruncatedFile(_))));
        assert!(matches!(parse_idx(&[0, 0], p, &labels, p, None), Err(Error::TruncatedFile(_))));
    }

    #[test]
    fn gaussians() {
        let a = synth_gaussians(100, 3, 4.0, 1).unwrap();
        assert_eq!(a.len(), 200);
        assert_eq!(a.class_counts(), vec![100, 100]);
        assert_eq!(a, synth_gaussians(100, 3, 4.0, 1).unwrap());
        assert!(matches!(synth_gaussians(10, 2, 0.0, 1), Err(Error::InvalidParam(_))));
        assert!(synth_gaussians(0, 2, 1.0, 1).is_err());
        let mean0: f64 = (0..100).map(|i| a.sample(2 * i)[0] as f64).sum::<f64>() / 100.0;
        assert!((mean0 + 2.0).abs() < 0.4);
    }

    #[test]
    fn sig6() {
        assert_eq!(format_sig6(0.0), "0");
        assert_eq!(format_sig6(1.0), "1");
        assert_eq!(format_sig6(0.5), "0.5");
        assert_eq!(format_sig6(2.0 / 3.0), "0.666667");
        assert_eq!(format_sig6(123456.7), "123457");
        assert_eq!(format_sig6(1234567.0), "1.23457e+06");
        assert_eq!(format_sig6(0.0001234567), "0.000123457");
        assert_eq!(format_sig6(0.00001234567), "1.23457e-05");
        assert_eq!(format_sig6(-0.25), "-0.25");
        assert_eq!(format_sig6(999999.5), "1e+06");
    }

    #[test]
    fn model_rejects_bad_documents() {
        let v2 = r#"{"format_version":2,"generation":1,"precision":"binary16","activation":"relu","layers":[]}"#;
        assert!(matches!(model_from_json(v2), Err(Error::FormatVersionUnsupported(2))));
        let masked = r#"{"format_version":1,"generation":1,"precision":"binary16","activation":"relu",
            "layers":[{"in_dim":2,"out_dim":1,"weights_f16":[15360,15360],"mask":[1,0],"bias_f16":[0]}]}"#;
        assert!(matches!(model_from_json(masked), Err(Error::Integrity(_))));
        let neg_zero = r#"{"format_version":1,"generation":1,"precision":"binary16","activation":"relu",
            "layers":[{"in_dim":2,"out_dim":1,"weights_f16":[15360,32768],"mask":[1,0],"bias_f16":[0]}]}"#;
        assert!(matches!(model_from_json(neg_zero), Err(Error::Integrity(_))));
        let shape = r#"{"format_version":1,"generation":1,"precision":"binary16","activation":"relu",
            "layers":[{"in_dim":2,"out_dim":1,"weights_f16":[15360],"mask":[1,1],"bias_f16":[0]}]}"#;
        assert!(matches!(model_from_json(shape), Err(Error::Integrity(_))));
        let extra = r#"{"format_version":1,"generation":4,"precision":"binary16","activation":"relu","note":"x",
            "layers":[{"in_dim":2,"out_dim":1,"weights_f16":[15360,0],"mask":[1,0],"bias_f16":[0]}]}"#;
        let (net, _) = model_from_json(extra).unwrap();
        assert_eq!(net.layers[0].weights, vec![1.0, 0.0]);
        assert_eq!(net.generation, 4);
        let inf = r#"{"format_version":1,"generation":1,"precision":"binary16","activation":"relu",
            "layers":[{"in_dim":1,"out_dim":1,"weights_f16":[31744],"mask":[1],"bias_f16":[0]}]}"#;
        assert!(matches!(model_from_json(inf), Err(Error::NumericFailure(_))));
    }
}
