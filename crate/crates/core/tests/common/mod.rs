#![allow(dead_code)]

use std::io::Cursor;
use std::path::{Path, PathBuf};

use microbe_screen::augment::Raster;
use microbe_screen::classify::ModelManifest;
use microbe_screen::Label;
use image::ImageFormat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn uniform(width: u32, height: u32, value: u8) -> Raster {
    Raster::new(width, height, 3, vec![value; (width * height * 3) as usize]).unwrap()
}

pub fn noise(width: u32, height: u32, channels: u8, seed: u64) -> Raster {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let px = (0..width * height * channels as u32).map(|_| rng.random::<u8>()).collect();
    Raster::new(width, height, channels, px).unwrap()
}

pub fn png_bytes(raster: &Raster) -> Vec<u8> {
    let mut buf = Cursor::new(Vec::new());
    raster.to_dynamic().write_to(&mut buf, ImageFormat::Png).unwrap();
    buf.into_inner()
}

pub fn save_png(raster: &Raster, path: &Path) {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).unwrap();
    }
    raster.to_dynamic().save(path).unwrap();
}

/// `root/{safe,unsafe}/img_XXX.png` with `per_class` small noise images each.
pub fn class_folders(root: &Path, per_class: usize, side: u32) {
    for label in Label::ALL {
        for i in 0..per_class {
            let seed = i as u64 * 2 + u64::from(label.is_unsafe());
            save_png(&noise(side, side, 3, seed), &root.join(label.as_str()).join(format!("img_{i:03}.png")));
        }
    }
}

/// Writes a reference-backend manifest and returns its path.
pub fn reference_manifest(dir: &Path, model_id: &str) -> PathBuf {
    let path = dir.join(format!("{model_id}.json"));
    ModelManifest::reference(model_id).save(&path).unwrap();
    path
}

#[cfg(feature = "onnx")]
pub mod onnx {
    //! ONNX graphs built from tract's own protobuf types:
    //! `GlobalAveragePool → Flatten → MatMul(W[c × k]) → Add(b[k])`.

    use prost::Message;
    use tract_onnx::pb;

    fn value_info(name: &str, dims: &[i64]) -> pb::ValueInfoProto {
        use pb::tensor_shape_proto::{dimension::Value, Dimension};
        pb::ValueInfoProto {
            name: name.into(),
            r#type: Some(pb::TypeProto {
                denotation: String::new(),
                value: Some(pb::type_proto::Value::TensorType(pb::type_proto::Tensor {
                    elem_type: pb::tensor_proto::DataType::Float as i32,
                    shape: Some(pb::TensorShapeProto {
                        dim: dims
                            .iter()
                            .map(|&d| Dimension { denotation: String::new(), value: Some(Value::DimValue(d)) })
                            .collect(),
                    }),
                })),
            }),
            doc_string: String::new(),
        }
    }

    fn initializer(name: &str, dims: &[i64], values: Vec<f32>) -> pb::TensorProto {
        pb::TensorProto {
            dims: dims.to_vec(),
            data_type: pb::tensor_proto::DataType::Float as i32,
            float_data: values,
            name: name.into(),
            ..Default::default()
        }
    }

    fn node(op: &str, inputs: &[&str], output: &str) -> pb::NodeProto {
        pb::NodeProto {
            input: inputs.iter().map(|s| s.to_string()).collect(),
            output: vec![output.into()],
            name: output.into(),
            op_type: op.into(),
            ..Default::default()
        }
    }

    /// Serialized model with `channels` inputs and `classes` outputs.
    pub fn pooled_linear(channels: i64, classes: i64, side: i64) -> Vec<u8> {
        let weights = (0..channels * classes).map(|i| ((i % 7) as f32 - 3.0) * 0.5).collect();
        let bias = (0..classes).map(|i| i as f32 * 0.1).collect();
        let graph = pb::GraphProto {
            name: "pooled_linear".into(),
            node: vec![
                node("GlobalAveragePool", &["input"], "pooled"),
                node("Flatten", &["pooled"], "flat"),
                node("MatMul", &["flat", "weights"], "scores"),
                node("Add", &["scores", "bias"], "logits"),
            ],
            initializer: vec![
                initializer("weights", &[channels, classes], weights),
                initializer("bias", &[classes], bias),
            ],
            input: vec![value_info("input", &[1, channels, side, side])],
            output: vec![value_info("logits", &[1, classes])],
            ..Default::default()
        };
        let model = pb::ModelProto {
            ir_version: 7,
            opset_import: vec![pb::OperatorSetIdProto { domain: String::new(), version: 13 }],
            producer_name: "microbe-screen-tests".into(),
            graph: Some(graph),
            ..Default::default()
        };
        model.encode_to_vec()
    }
}
