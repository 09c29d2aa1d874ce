use super::{ClassifyError, ModelManifest};
use crate::augment::Raster;

/// Planar `3 × side × side` tensor (channel-major, then rows).
#[derive(Debug, Clone, PartialEq)]
pub struct InputTensor {
    side: usize,
    data: Vec<f32>,
}

impl InputTensor {
    pub fn new(side: usize, data: Vec<f32>) -> Result<Self, ClassifyError> {
        if side == 0 || data.len() != 3 * side * side {
            return Err(ClassifyError::InvalidTensor(format!("{} values for side {side}", data.len())));
        }
        Ok(InputTensor { side, data })
    }

    pub fn filled(side: usize, value: f32) -> Self {
        InputTensor { side, data: vec![value; 3 * side * side] }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn get(&self, channel: usize, y: usize, x: usize) -> f32 {
        self.data[(channel * self.side + y) * self.side + x]
    }

    /// Mean of all elements, summed in index order in `f64`.
    pub fn mean(&self) -> f64 {
        self.data.iter().map(|&v| v as f64).sum::<f64>() / self.data.len() as f64
    }
}

/// RGB planes of a raster, as `f64` in `[0, 255]`. Gray is replicated, alpha dropped.
fn rgb_planes(image: &Raster) -> [Vec<f64>; 3] {
    let n = image.width() as usize * image.height() as usize;
    let c = image.channels() as usize;
    let px = image.pixels();
    let plane = |k: usize| -> Vec<f64> {
        let src = if c >= 3 { k } else { 0 };
        (0..n).map(|i| px[i * c + src] as f64).collect()
    };
    [plane(0), plane(1), plane(2)]
}

/// Bilinear sample positions for one axis: for each output index, the two
/// source indices and the weight of the second. Pixel centers sit at `i + 0.5`.
fn axis_taps(src_len: usize, dst_len: usize) -> Vec<(usize, usize, f64)> {
    let scale = src_len as f64 / dst_len as f64;
    (0..dst_len)
        .map(|i| {
            let pos = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, (src_len - 1) as f64);
            let lo = pos.floor() as usize;
            let hi = (lo + 1).min(src_len - 1);
            (lo, hi, pos - lo as f64)
        })
        .collect()
}

/// Center-crops to a square, resizes bilinearly to `input_side` (skipped when
/// the crop already has that side), scales to `[0, 1]` and normalizes per channel.
pub fn preprocess(image: &Raster, manifest: &ModelManifest) -> Result<InputTensor, ClassifyError> {
    let (w, h) = (image.width() as usize, image.height() as usize);
    if w == 0 || h == 0 {
        return Err(ClassifyError::UndecodableImage("empty image".into()));
    }
    let crop = w.min(h);
    let (x0, y0) = ((w - crop) / 2, (h - crop) / 2);
    let side = manifest.input_side as usize;
    let planes = rgb_planes(image);
    let taps = axis_taps(crop, side);

    let mut data = Vec::with_capacity(3 * side * side);
    for (c, plane) in planes.iter().enumerate() {
        let at = |x: usize, y: usize| plane[(y0 + y) * w + x0 + x];
        let (mean, std) = (manifest.channel_means[c], manifest.channel_stds[c]);
        for y in 0..side {
            for x in 0..side {
                let raw = if crop == side {
                    at(x, y)
                } else {
                    let (ya, yb, fy) = taps[y];
                    let (xa, xb, fx) = taps[x];
                    let top = at(xa, ya) * (1.0 - fx) + at(xb, ya) * fx;
                    let bottom = at(xa, yb) * (1.0 - fx) + at(xb, yb) * fx;
                    top * (1.0 - fy) + bottom * fy
                };
                data.push(((raw / 255.0 - mean) / std) as f32);
            }
        }
    }
    Ok(InputTensor { side, data })
}

/// Decodes PNG, JPEG or any other enabled format, then preprocesses.
pub fn preprocess_bytes(bytes: &[u8], manifest: &ModelManifest) -> Result<InputTensor, ClassifyError> {
    preprocess(&decode(bytes)?, manifest)
}

pub fn decode(bytes: &[u8]) -> Result<Raster, ClassifyError> {
    let image = image::load_from_memory(bytes).map_err(|e| ClassifyError::UndecodableImage(e.to_string()))?;
    Ok(Raster::from_dynamic(&image))
}

/// Two-way softmax with max subtraction.
pub fn softmax(logits: [f64; 2]) -> Result<[f64; 2], ClassifyError> {
    if !logits.iter().all(|v| v.is_finite()) {
        return Err(ClassifyError::NonFiniteLogits(logits));
    }
    let m = logits[0].max(logits[1]);
    let e = [(logits[0] - m).exp(), (logits[1] - m).exp()];
    let z = e[0] + e[1];
    Ok([e[0] / z, e[1] / z])
}
