use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::{LstmModel, Params, GATE_NAMES};
use crate::encoder::{StateTiming, StatusAugmentation};
use crate::error::{Error, Result};
use crate::event::Maxima;

pub const MODEL_FORMAT: &str = "evseg-lstm";
pub const MODEL_VERSION: u32 = 1;

/// Everything needed to reproduce the encoder a model was trained with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub omega: f64,
    pub augmentation: StatusAugmentation,
    pub maxima: Maxima,
    #[serde(default)]
    pub state_timing: StateTiming,
    /// Event names, index = id.
    pub vocabulary: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Matrix {
    rows: usize,
    cols: usize,
    /// Row-major.
    data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Layer {
    name: String,
    weights: Matrix,
    bias: Vec<f64>,
}

/// On-disk JSON form of a trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    format: String,
    version: u32,
    input_width: usize,
    hidden_width: usize,
    time_steps: usize,
    pub meta: ModelMeta,
    gates: Vec<Layer>,
    output: Layer,
}

impl ModelFile {
    pub fn new(model: &LstmModel, meta: ModelMeta) -> Self {
        let (d, h) = (model.input_width(), model.hidden());
        let p = model.params();
        let block = h * (d + h);
        let gates = GATE_NAMES
            .iter()
            .enumerate()
            .map(|(k, name)| Layer {
                name: name.to_string(),
                weights: Matrix {
                    rows: h,
                    cols: d + h,
                    data: p.gate_weights[k * block..(k + 1) * block].to_vec(),
                },
                bias: p.gate_bias[k * h..(k + 1) * h].to_vec(),
            })
            .collect();
        ModelFile {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            input_width: d,
            hidden_width: h,
            time_steps: model.time_steps(),
            meta,
            gates,
            output: Layer {
                name: "output".into(),
                weights: Matrix {
                    rows: 2,
                    cols: h,
                    data: p.out_weights.clone(),
                },
                bias: p.out_bias.clone(),
            },
        }
    }

    pub fn model(&self) -> Result<LstmModel> {
        if self.format != MODEL_FORMAT {
            return Err(Error::InvalidConfig(format!("not a model file: `{}`", self.format)));
        }
        if self.version != MODEL_VERSION {
            return Err(Error::UnsupportedVersion(self.version));
        }
        let (d, h) = (self.input_width, self.hidden_width);
        if self.gates.len() != 4 {
            return Err(Error::InvalidConfig(format!("expected 4 gates, found {}", self.gates.len())));
        }
        let mut params = Params::zeros(d, h);
        params.gate_weights.clear();
        params.gate_bias.clear();
        for (layer, name) in self.gates.iter().zip(GATE_NAMES) {
            if layer.name != name || layer.weights.rows != h || layer.weights.cols != d + h {
                return Err(Error::InvalidConfig(format!("malformed gate `{}`", layer.name)));
            }
            params.gate_weights.extend_from_slice(&layer.weights.data);
            params.gate_bias.extend_from_slice(&layer.bias);
        }
        params.out_weights = self.output.weights.data.clone();
        params.out_bias = self.output.bias.clone();
        LstmModel::from_params(d, h, self.time_steps, params)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model file serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        ModelFile::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lstm::WindowSample;

    fn meta() -> ModelMeta {
        ModelMeta {
            omega: 3.0,
            augmentation: "people+light".parse().unwrap(),
            maxima: Maxima::default(),
            state_timing: StateTiming::After,
            vocabulary: vec!["a".into(), "b".into(), "c".into()],
        }
    }

    #[test]
    fn reload_gives_bit_identical_inference() {
        let model = LstmModel::init(5, 4, 6, 77).unwrap();
        let text = ModelFile::new(&model, meta()).to_json();
        let back = ModelFile::from_json(&text).unwrap();
        let reloaded = back.model().unwrap();
        assert_eq!(reloaded, model);
        assert_eq!(back.meta, meta());

        let x: Vec<f64> = (0..30).map(|i| ((i * 7) % 11) as f64 / 11.0).collect();
        let w = WindowSample::new(&x, 5, 6);
        let a = model.forward(&w).unwrap().outputs;
        let b = reloaded.forward(&w).unwrap().outputs;
        for (ya, yb) in a.iter().zip(&b) {
            assert_eq!(ya[0].to_bits(), yb[0].to_bits());
            assert_eq!(ya[1].to_bits(), yb[1].to_bits());
        }
    }

    #[test]
    fn wrong_version_rejected() {
        let model = LstmModel::init(2, 2, 3, 1).unwrap();
        let mut file = ModelFile::new(&model, meta());
        file.version = 99;
        assert!(matches!(file.model(), Err(Error::UnsupportedVersion(99))));
    }
}
