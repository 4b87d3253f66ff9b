//! Integer rasterization of frames and trial directories on disk.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use image::{imageops, Rgb, RgbImage};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::ObjectInstance;
use crate::stimulus::{AssetRef, Catalog, Glyph};
use crate::trial::{TrialDocument, TrialInstance};
use crate::value::Location;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("invalid canvas: {0}")]
    Config(String),
    #[error("two objects at {location} in frame {frame}")]
    LocationClash { frame: usize, location: Location },
    #[error("no asset for {0}")]
    MissingAsset(String),
    #[error("cannot load {path}: {source}")]
    Asset {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("cannot encode {path}: {source}")]
    Encode {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanvasConfig {
    pub canvas_px: u32,
    pub sprite_px: u32,
    pub background: u8,
}

impl Default for CanvasConfig {
    fn default() -> Self {
        CanvasConfig {
            canvas_px: 224,
            sprite_px: 96,
            background: 128,
        }
    }
}

impl CanvasConfig {
    pub fn validate(&self) -> Result<(), RenderError> {
        if self.sprite_px == 0 || self.sprite_px > self.canvas_px / 2 {
            return Err(RenderError::Config(format!(
                "sprite of {} px does not fit a quadrant of a {} px canvas",
                self.sprite_px, self.canvas_px
            )));
        }
        Ok(())
    }

    /// Pixel center of a quadrant.
    pub fn anchor(&self, location: Location) -> (u32, u32) {
        let (near, far) = (self.canvas_px / 4, self.canvas_px * 3 / 4);
        match location {
            Location::TopLeft => (near, near),
            Location::TopRight => (far, near),
            Location::BottomLeft => (near, far),
            Location::BottomRight => (far, far),
        }
    }

    pub fn blank(&self) -> RgbImage {
        let g = self.background;
        RgbImage::from_pixel(self.canvas_px, self.canvas_px, Rgb([g, g, g]))
    }
}

const PALETTE: [[u8; 3]; 8] = [
    [220, 40, 40],
    [40, 160, 60],
    [40, 80, 220],
    [230, 200, 30],
    [160, 50, 190],
    [30, 190, 200],
    [240, 130, 30],
    [250, 250, 250],
];
const INK: [u8; 3] = [20, 20, 20];

fn inside_shape(shape: usize, x: i64, y: i64, r: i64) -> bool {
    let (ax, ay) = (x.abs(), y.abs());
    let in_box = ax <= r && ay <= r;
    match shape % 8 {
        0 => in_box,
        1 => x * x + y * y <= r * r,
        2 => in_box && 2 * ax <= y + r,
        3 => ax + ay <= r,
        4 => (ax <= r / 3 && ay <= r) || (ay <= r / 3 && ax <= r),
        5 => {
            let d = x * x + y * y;
            d <= r * r && 4 * d >= r * r
        }
        6 => in_box && (2 * ax >= r || 4 * ay <= r),
        _ => in_box && (ax - ay).abs() <= r / 3,
    }
}

/// Procedural sprite: the category picks the shape, the identity its fill and
/// stripes, the view angle a mirror, quarter turn or shear. A corner mark
/// makes the orientation visible.
pub fn glyph_sprite(glyph: &Glyph, size: u32) -> Vec<Option<[u8; 3]>> {
    let s = size as i64;
    let r = s * 3 / 4;
    let color = PALETTE[(glyph.identity % 8) as usize];
    let stripes = (glyph.identity / 8) % 3;
    let mut out = vec![None; (size * size) as usize];
    for v in 0..s {
        for u in 0..s {
            let (tu, tv) = match glyph.view_angle % 4 {
                0 => (u, v),
                1 => (s - 1 - u, v),
                2 => (v, s - 1 - u),
                _ => (u + (v - s / 2) / 3, v),
            };
            if !(0..s).contains(&tu) {
                continue;
            }
            let (x, y) = (2 * tu + 1 - s, 2 * tv + 1 - s);
            let pixel = if x <= -r / 2 && y <= -r / 2 && x >= -r && y >= -r {
                Some(INK)
            } else if inside_shape(glyph.category, x, y, r) {
                let striped = match stripes {
                    1 => (tv / 6) % 2 == 1,
                    2 => (tu / 6) % 2 == 1,
                    _ => false,
                };
                Some(if striped { INK } else { color })
            } else {
                None
            };
            out[(v * s + u) as usize] = pixel;
        }
    }
    out
}

fn file_sprite(path: &Path, size: u32) -> Result<Vec<Option<[u8; 3]>>, RenderError> {
    let img = image::open(path)
        .map_err(|source| RenderError::Asset {
            path: path.to_path_buf(),
            source,
        })?
        .to_rgba8();
    let scaled = imageops::resize(&img, size, size, imageops::FilterType::Nearest);
    Ok(scaled
        .pixels()
        .map(|p| (p[3] >= 128).then_some([p[0], p[1], p[2]]))
        .collect())
}

/// Draws the objects of one frame. An empty slice gives a blank frame.
pub fn render_frame(
    objects: &[&ObjectInstance],
    catalog: &Catalog,
    config: &CanvasConfig,
) -> Result<RgbImage, RenderError> {
    config.validate()?;
    let mut canvas = config.blank();
    let mut taken = Vec::new();
    for o in objects {
        if taken.contains(&o.location) {
            return Err(RenderError::LocationClash {
                frame: o.frame_index,
                location: o.location,
            });
        }
        taken.push(o.location);
        let sprite = match catalog.asset(&o.stimulus) {
            Some(AssetRef::Glyph(g)) => glyph_sprite(g, config.sprite_px),
            Some(AssetRef::File(path)) => file_sprite(path, config.sprite_px)?,
            None => {
                let s = &o.stimulus;
                return Err(RenderError::MissingAsset(format!(
                    "{} {} at view angle {}",
                    s.category, s.identity, s.view_angle
                )));
            }
        };
        let (cx, cy) = config.anchor(o.location);
        let (x0, y0) = (cx - config.sprite_px / 2, cy - config.sprite_px / 2);
        for (i, px) in sprite.into_iter().enumerate() {
            if let Some(rgb) = px {
                let i = i as u32;
                canvas.put_pixel(x0 + i % config.sprite_px, y0 + i / config.sprite_px, Rgb(rgb));
            }
        }
    }
    Ok(canvas)
}

/// Every frame of `trial`, in order.
pub fn render_trial(
    trial: &TrialInstance,
    catalog: &Catalog,
    config: &CanvasConfig,
) -> Result<Vec<RgbImage>, RenderError> {
    (0..trial.n_frames())
        .map(|f| {
            let objects: Vec<&ObjectInstance> = trial.objects.in_frame(f).collect();
            render_frame(&objects, catalog, config)
        })
        .collect()
}

pub fn frame_file_name(index: usize) -> String {
    format!("frame_{index:03}.png")
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> RenderError + '_ {
    move |source| RenderError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `trial.json` and, when `images` is non-empty, `frames/frame_NNN.png`.
/// Returns the written paths.
pub fn write_trial(trial: &TrialInstance, images: &[RgbImage], out_dir: &Path) -> Result<Vec<PathBuf>, RenderError> {
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut written = Vec::new();
    if !images.is_empty() {
        let frames = out_dir.join("frames");
        fs::create_dir_all(&frames).map_err(io_err(&frames))?;
        for (i, img) in images.iter().enumerate() {
            let path = frames.join(frame_file_name(i));
            img.save_with_format(&path, image::ImageFormat::Png)
                .map_err(|source| RenderError::Encode {
                    path: path.clone(),
                    source,
                })?;
            written.push(path);
        }
    }
    let path = out_dir.join("trial.json");
    fs::write(&path, TrialDocument::from_trial(trial).to_json()).map_err(io_err(&path))?;
    written.push(path);
    Ok(written)
}

/// Renders and writes a trial in one step.
pub fn render_and_write(
    trial: &TrialInstance,
    catalog: &Catalog,
    config: &CanvasConfig,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, RenderError> {
    let images = render_trial(trial, catalog, config)?;
    write_trial(trial, &images, out_dir)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stimulus::{builtin_catalog, StimulusSpec};

    fn object(location: Location, view_angle: u32) -> ObjectInstance {
        ObjectInstance {
            frame_index: 0,
            location,
            stimulus: StimulusSpec {
                category: "cars".into(),
                identity: 2,
                view_angle,
            },
            ordinal: Some(1),
            is_distractor: false,
        }
    }

    #[test]
    fn empty_frame_is_background() {
        let img = render_frame(&[], &builtin_catalog(), &CanvasConfig::default()).unwrap();
        assert!(img.pixels().all(|p| p.0 == [128, 128, 128]));
    }

    #[test]
    fn sprite_sits_in_its_quadrant() {
        let config = CanvasConfig::default();
        let o = object(Location::BottomLeft, 0);
        let img = render_frame(&[&o], &builtin_catalog(), &config).unwrap();
        let painted: Vec<(u32, u32)> = img
            .enumerate_pixels()
            .filter(|(_, _, p)| p.0 != [128, 128, 128])
            .map(|(x, y, _)| (x, y))
            .collect();
        assert!(!painted.is_empty());
        assert!(painted.iter().all(|&(x, y)| x < 112 && y >= 112));
        assert_eq!(img, render_frame(&[&o], &builtin_catalog(), &config).unwrap());
    }

    #[test]
    fn view_angles_differ() {
        let g = |view_angle| {
            glyph_sprite(
                &Glyph {
                    category: 2,
                    identity: 1,
                    view_angle,
                },
                48,
            )
        };
        assert_ne!(g(0), g(1));
        assert_ne!(g(0), g(2));
        assert_ne!(g(0), g(3));
    }

    #[test]
    fn clash_is_an_error() {
        let (a, b) = (object(Location::TopLeft, 0), object(Location::TopLeft, 1));
        assert!(matches!(
            render_frame(&[&a, &b], &builtin_catalog(), &CanvasConfig::default()),
            Err(RenderError::LocationClash { .. })
        ));
    }

    #[test]
    fn oversized_sprite_is_rejected() {
        let config = CanvasConfig {
            sprite_px: 120,
            ..CanvasConfig::default()
        };
        assert!(config.validate().is_err());
    }
}
