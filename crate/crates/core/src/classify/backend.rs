use super::{ClassifyError, InputTensor};
use crate::Label;

/// Whether a backend tolerates simultaneous `infer` calls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Access {
    Concurrent,
    /// Calls are serialized by the owning [`Classifier`](super::Classifier).
    Exclusive,
}

/// A two-class network. Logit `i` belongs to `class_order[i]` of the manifest.
pub trait InferenceBackend: Send + Sync {
    fn access(&self) -> Access;
    fn infer(&self, tensor: &InputTensor) -> Result<[f64; 2], ClassifyError>;
}

/// Slope of the reference rule.
pub const REFERENCE_GAIN: f64 = 10.0;
/// Brightness at which the reference rule is undecided.
pub const REFERENCE_MIDPOINT: f64 = 0.5;

/// Deterministic stand-in network: darker fields score unsafe.
///
/// With `m` the mean of the tensor, the safe logit is `10·(m − 0.5)` and the
/// unsafe logit its negation. Expects raw `[0, 1]` inputs (means 0, stds 1).
#[derive(Debug, Clone)]
pub struct ReferenceBackend {
    class_order: [Label; 2],
}

impl ReferenceBackend {
    pub fn new(class_order: [Label; 2]) -> Self {
        ReferenceBackend { class_order }
    }
}

/// `(z_safe, z_unsafe)` for a tensor under the reference rule.
pub fn reference_infer(tensor: &InputTensor) -> [f64; 2] {
    let z = REFERENCE_GAIN * (tensor.mean() - REFERENCE_MIDPOINT);
    [z, -z]
}

impl InferenceBackend for ReferenceBackend {
    fn access(&self) -> Access {
        Access::Concurrent
    }

    fn infer(&self, tensor: &InputTensor) -> Result<[f64; 2], ClassifyError> {
        let [safe, unsafe_] = reference_infer(tensor);
        Ok(self.class_order.map(|l| if l.is_unsafe() { unsafe_ } else { safe }))
    }
}

#[cfg(feature = "onnx")]
pub use onnx::OnnxBackend;

#[cfg(feature = "onnx")]
mod onnx {
    use std::path::Path;

    use tract_onnx::prelude::*;

    use super::{Access, ClassifyError, InferenceBackend, InputTensor};

    /// ONNX model executed by tract. Input `1×3×side×side` f32, output `1×2`.
    pub struct OnnxBackend {
        plan: TypedRunnableModel<TypedModel>,
        side: usize,
    }

    impl std::fmt::Debug for OnnxBackend {
        fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
            f.debug_struct("OnnxBackend").field("side", &self.side).finish_non_exhaustive()
        }
    }

    impl OnnxBackend {
        pub fn load(path: &Path, side: usize) -> Result<Self, ClassifyError> {
            let incompatible = |e: TractError| ClassifyError::ModelIncompatible(format!("{e:#}"));
            let model = tract_onnx::onnx().model_for_path(path).map_err(incompatible)?;
            if model.inputs.len() != 1 || model.outputs.len() != 1 {
                return Err(ClassifyError::ModelIncompatible(format!(
                    "{} inputs and {} outputs, expected one of each",
                    model.inputs.len(),
                    model.outputs.len()
                )));
            }
            let typed = model
                .with_input_fact(0, f32::fact([1, 3, side, side]).into())
                .and_then(|m| m.into_typed())
                .map_err(incompatible)?;
            let shape = typed.output_fact(0).map_err(incompatible)?.shape.as_concrete().map(|s| s.to_vec());
            if shape.as_deref() != Some(&[1, 2][..]) {
                return Err(ClassifyError::ModelIncompatible(format!("output shape {shape:?}, expected [1, 2]")));
            }
            let plan = typed.into_optimized().and_then(|m| m.into_runnable()).map_err(incompatible)?;
            Ok(OnnxBackend { plan, side })
        }
    }

    impl InferenceBackend for OnnxBackend {
        fn access(&self) -> Access {
            Access::Concurrent
        }

        fn infer(&self, tensor: &InputTensor) -> Result<[f64; 2], ClassifyError> {
            if tensor.side() != self.side {
                return Err(ClassifyError::InvalidTensor(format!("side {} for a {} model", tensor.side(), self.side)));
            }
            let runtime = |e: TractError| ClassifyError::Runtime(format!("{e:#}"));
            let input = Tensor::from_shape(&[1, 3, self.side, self.side], tensor.data()).map_err(runtime)?;
            let outputs = self.plan.run(tvec!(input.into())).map_err(runtime)?;
            let view = outputs[0].to_array_view::<f32>().map_err(runtime)?;
            let v: Vec<f64> = view.iter().map(|&x| x as f64).collect();
            Ok([v[0], v[1]])
        }
    }
}
