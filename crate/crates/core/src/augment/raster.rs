use image::{DynamicImage, GrayAlphaImage, GrayImage, RgbImage, RgbaImage};

use super::{AugmentError, TilePermutation, GRID_SIDE};

/// An 8-bit, channel-interleaved, row-major raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    width: u32,
    height: u32,
    channels: u8,
    pixels: Vec<u8>,
}

impl Raster {
    pub fn new(width: u32, height: u32, channels: u8, pixels: Vec<u8>) -> Result<Self, AugmentError> {
        if !(1..=4).contains(&channels) {
            return Err(AugmentError::InvalidRaster(format!("{channels} channels")));
        }
        let expected = width as usize * height as usize * channels as usize;
        if pixels.len() != expected {
            return Err(AugmentError::InvalidRaster(format!(
                "{width}x{height}x{channels} needs {expected} bytes, got {}",
                pixels.len()
            )));
        }
        Ok(Raster { width, height, channels, pixels })
    }

    /// Converts any decoded image to 8 bits per channel, keeping its channel count.
    pub fn from_dynamic(image: &DynamicImage) -> Self {
        let (width, height) = (image.width(), image.height());
        let (channels, pixels) = match image {
            DynamicImage::ImageLuma8(img) => (1, img.as_raw().clone()),
            DynamicImage::ImageLumaA8(img) => (2, img.as_raw().clone()),
            DynamicImage::ImageRgb8(img) => (3, img.as_raw().clone()),
            DynamicImage::ImageRgba8(img) => (4, img.as_raw().clone()),
            other if other.color().has_alpha() => (4, other.to_rgba8().into_raw()),
            other if other.color().channel_count() == 1 => (1, other.to_luma8().into_raw()),
            other => (3, other.to_rgb8().into_raw()),
        };
        Raster { width, height, channels, pixels }
    }

    pub fn to_dynamic(&self) -> DynamicImage {
        let (w, h, px) = (self.width, self.height, self.pixels.clone());
        // Lengths are checked at construction, so the buffers always fit.
        match self.channels {
            1 => DynamicImage::ImageLuma8(GrayImage::from_raw(w, h, px).expect("raster size")),
            2 => DynamicImage::ImageLumaA8(GrayAlphaImage::from_raw(w, h, px).expect("raster size")),
            3 => DynamicImage::ImageRgb8(RgbImage::from_raw(w, h, px).expect("raster size")),
            _ => DynamicImage::ImageRgba8(RgbaImage::from_raw(w, h, px).expect("raster size")),
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixel(&self, x: u32, y: u32) -> &[u8] {
        let c = self.channels as usize;
        let start = (y as usize * self.width as usize + x as usize) * c;
        &self.pixels[start..start + c]
    }

    fn crop(&self, x0: u32, y0: u32, width: u32, height: u32) -> Raster {
        let c = self.channels as usize;
        let row_bytes = width as usize * c;
        let mut pixels = Vec::with_capacity(row_bytes * height as usize);
        for y in y0..y0 + height {
            let start = (y as usize * self.width as usize + x0 as usize) * c;
            pixels.extend_from_slice(&self.pixels[start..start + row_bytes]);
        }
        Raster { width, height, channels: self.channels, pixels }
    }
}

/// A square raster whose side is a positive multiple of the grid side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SquareImage(Raster);

impl SquareImage {
    pub fn side(&self) -> u32 {
        self.0.width
    }

    pub fn tile_side(&self) -> u32 {
        self.0.width / GRID_SIDE
    }

    pub fn raster(&self) -> &Raster {
        &self.0
    }

    pub fn into_raster(self) -> Raster {
        self.0
    }

    pub fn to_dynamic(&self) -> DynamicImage {
        self.0.to_dynamic()
    }
}

impl TryFrom<Raster> for SquareImage {
    type Error = AugmentError;

    fn try_from(raster: Raster) -> Result<Self, Self::Error> {
        if raster.width != raster.height || raster.width == 0 || raster.width % GRID_SIDE != 0 {
            return Err(AugmentError::GeometryMismatch { width: raster.width, height: raster.height });
        }
        Ok(SquareImage(raster))
    }
}

/// Center-crops to the largest square whose side is a multiple of 4. No resampling.
pub fn make_square(image: &Raster) -> Result<SquareImage, AugmentError> {
    let min_side = image.width.min(image.height);
    if min_side < GRID_SIDE {
        return Err(AugmentError::ImageTooSmall { width: image.width, height: image.height });
    }
    let side = min_side / GRID_SIDE * GRID_SIDE;
    let x0 = (image.width - side) / 2;
    let y0 = (image.height - side) / 2;
    Ok(SquareImage(image.crop(x0, y0, side, side)))
}

/// Rearranges tiles: output tile `i` (row-major) is input tile `perm.mapping()[i]`.
pub fn apply_permutation(image: &SquareImage, perm: &TilePermutation) -> SquareImage {
    let raster = &image.0;
    let c = raster.channels as usize;
    let side = raster.width as usize;
    let tile = image.tile_side() as usize;
    let grid = GRID_SIDE as usize;
    let tile_row_bytes = tile * c;
    let mut out = vec![0u8; raster.pixels.len()];
    for (dst, &src) in perm.mapping().iter().enumerate() {
        let (dst_ty, dst_tx) = (dst / grid, dst % grid);
        let (src_ty, src_tx) = (src as usize / grid, src as usize % grid);
        for row in 0..tile {
            let dst_off = ((dst_ty * tile + row) * side + dst_tx * tile) * c;
            let src_off = ((src_ty * tile + row) * side + src_tx * tile) * c;
            out[dst_off..dst_off + tile_row_bytes]
                .copy_from_slice(&raster.pixels[src_off..src_off + tile_row_bytes]);
        }
    }
    SquareImage(Raster { width: raster.width, height: raster.height, channels: raster.channels, pixels: out })
}
