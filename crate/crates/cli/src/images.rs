use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::Context;
use image::ColorType;
use soilsense_core::imaging::{
    decode_pnm, encode_pnm, label_regions, DustPipeline, PnmEncoding, RasterImage,
};

use crate::args::{ClassifyArgs, DetectArgs, Global, PipelineArgs};
use crate::post::post_value;

/// PNM is decoded in-house; PNG and JPEG go through the `image` crate.
pub fn load_image(path: &Path) -> anyhow::Result<RasterImage> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    if bytes.first() == Some(&b'P') {
        return decode_pnm(&bytes).with_context(|| format!("decoding {}", path.display()));
    }
    let img = image::load_from_memory(&bytes).with_context(|| format!("decoding {}", path.display()))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let raster = match img.color() {
        ColorType::L8 | ColorType::La8 | ColorType::L16 | ColorType::La16 => {
            RasterImage::gray(w, h, img.to_luma8().into_raw())?
        }
        _ => RasterImage::new(w, h, 3, img.to_rgb8().into_raw())?,
    };
    Ok(raster)
}

fn pipeline(a: &PipelineArgs) -> DustPipeline {
    DustPipeline {
        crop: a.crop,
        denoise: a.denoise,
        enhance_radius: (!a.no_enhance).then_some(a.radius),
        threshold: a.threshold,
        ..Default::default()
    }
}

pub fn classify(_g: &Global, a: &ClassifyArgs) -> anyhow::Result<()> {
    let img = load_image(&a.image)?;
    let r = pipeline(&a.pipeline).run(&img)?;
    if let Some(out) = &a.save_binary {
        let px = r.binary.bits().iter().map(|&b| if b { 0 } else { 255 }).collect();
        let gray = RasterImage::gray(r.binary.width(), r.binary.height(), px)?;
        fs::write(out, encode_pnm(&gray, PnmEncoding::Binary))?;
    }
    if a.json {
        let v = serde_json::json!({
            "image": a.image.display().to_string(),
            "black_pixels": r.report.black_pixels,
            "white_pixels": r.report.white_pixels,
            "black_ratio": r.report.black_ratio,
            "class": r.class.as_str(),
        });
        println!("{v}");
    } else {
        println!(
            "{}: {:.2}% black ({} of {} pixels) -> {}",
            a.image.display(),
            r.report.black_percent(),
            r.report.black_pixels,
            r.report.black_pixels + r.report.white_pixels,
            r.class.as_str()
        );
    }
    if let Some(base) = &a.post.post {
        post_value(&a.post, base, "image_black_ratio", r.report.black_ratio)?;
    }
    Ok(())
}

pub fn detect(_g: &Global, a: &DetectArgs) -> anyhow::Result<()> {
    let img = load_image(&a.image)?;
    let r = pipeline(&a.pipeline).run(&img)?;
    let (ox, oy) = a.pipeline.crop.map(|c| (c.x, c.y)).unwrap_or((0, 0));
    let image_id = match &a.image_id {
        Some(id) => id.clone(),
        None => a
            .image
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
    };
    let (_, regions) = label_regions(&r.binary);
    let mut out: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(&mut out);
    w.write_record(["image_id", "label", "xmin", "ymin", "xmax", "ymax", "confidence"])?;
    let mut found = 0;
    for reg in regions.iter().filter(|g| g.area >= a.min_area) {
        let bw = (reg.x_max - reg.x_min) * (reg.y_max - reg.y_min);
        // fill ratio of the box stands in for a score
        let conf = reg.area as f64 / bw as f64;
        w.write_record([
            image_id.clone(),
            a.label.clone(),
            (reg.x_min + ox).to_string(),
            (reg.y_min + oy).to_string(),
            (reg.x_max + ox).to_string(),
            (reg.y_max + oy).to_string(),
            format!("{conf:.4}"),
        ])?;
        found += 1;
    }
    w.flush()?;
    drop(w);
    eprintln!("{image_id}: {found} {} detected", a.label);
    if let Some(base) = &a.post.post {
        post_value(&a.post, base, &a.label, if found > 0 { 1.0 } else { 0.0 })?;
    }
    Ok(())
}
