use anyhow::{bail, Result};
use skmmse::framework::PATCH_OFFSETS;
use skmmse::{ImageBuffer, Layer, LossMask, PatchRecord, PixelState};

pub fn layer_color(layer: Layer) -> [u8; 3] {
    match layer {
        Layer::Brl => [255, 0, 0],
        Layer::Idl => [0, 255, 0],
        Layer::Hql => [0, 0, 255],
    }
}

/// RGB rendering of which layer rebuilt each lost pixel: BRL red, IDL green,
/// HQL blue. Pixels that were never lost show `base` in gray.
pub fn emit_layer_map(base: &ImageBuffer, lost: &LossMask, records: &[PatchRecord]) -> Result<Vec<u8>> {
    let lost_pixels = lost.states().iter().filter(|&&s| s != PixelState::Available).count();
    if records.is_empty() && lost_pixels > 0 {
        bail!("no per-patch diagnostics to render");
    }
    let mut rgb: Vec<u8> = base.to_bytes().into_iter().flat_map(|v| [v, v, v]).collect();
    let width = base.width();
    for record in records {
        let color = layer_color(record.layer);
        for (dx, dy) in PATCH_OFFSETS {
            let (x, y) = (record.origin.0 + dx as usize, record.origin.1 + dy as usize);
            if lost.state(x, y) != PixelState::Available {
                let i = (y * width + x) * 3;
                rgb[i..i + 3].copy_from_slice(&color);
            }
        }
    }
    Ok(rgb)
}
