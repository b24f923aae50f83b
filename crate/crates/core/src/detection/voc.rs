use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BoundingBox, DetectionError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledBox {
    pub label: String,
    pub bbox: BoundingBox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    /// File stem of `<filename>` (or `<path>` when filename is absent).
    pub image_id: String,
    pub filename: Option<String>,
    pub path: Option<String>,
    /// (width, height, depth) from `<size>` when present.
    pub size: Option<(u32, u32, u32)>,
    pub boxes: Vec<LabeledBox>,
}

fn child<'a, 'i>(node: roxmltree::Node<'a, 'i>, name: &str) -> Option<roxmltree::Node<'a, 'i>> {
    node.children().find(|c| c.has_tag_name(name))
}

fn child_text<'a>(node: roxmltree::Node<'a, '_>, name: &str) -> Option<&'a str> {
    child(node, name).and_then(|c| c.text()).map(str::trim)
}

fn coord(bndbox: roxmltree::Node<'_, '_>, field: &'static str) -> Result<f64, DetectionError> {
    let text = child_text(bndbox, field).ok_or(DetectionError::MissingElement(field))?;
    text.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| DetectionError::BadNumber {
            field,
            text: text.to_string(),
        })
}

fn stem(name: &str) -> String {
    Path::new(name)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| name.to_string())
}

pub fn parse_voc(xml: &str) -> Result<Annotation, DetectionError> {
    let doc = roxmltree::Document::parse(xml).map_err(|e| DetectionError::Xml(e.to_string()))?;
    let root = doc.root_element();
    if !root.has_tag_name("annotation") {
        return Err(DetectionError::MissingElement("annotation"));
    }
    let filename = child_text(root, "filename").filter(|s| !s.is_empty()).map(String::from);
    let path = child_text(root, "path").filter(|s| !s.is_empty()).map(String::from);
    let image_id = filename
        .as_deref()
        .or(path.as_deref())
        .map(stem)
        .ok_or(DetectionError::MissingElement("filename"))?;
    let size = child(root, "size").and_then(|s| {
        let n = |f| child_text(s, f).and_then(|t| t.parse::<u32>().ok());
        Some((n("width")?, n("height")?, n("depth").unwrap_or(3)))
    });

    let mut boxes = Vec::new();
    for obj in root.children().filter(|c| c.has_tag_name("object")) {
        let label = child_text(obj, "name").ok_or(DetectionError::MissingElement("name"))?;
        let bnd = child(obj, "bndbox").ok_or(DetectionError::MissingElement("bndbox"))?;
        let bbox = BoundingBox::new(
            coord(bnd, "xmin")?,
            coord(bnd, "ymin")?,
            coord(bnd, "xmax")?,
            coord(bnd, "ymax")?,
        )?;
        boxes.push(LabeledBox {
            label: label.to_string(),
            bbox,
        });
    }
    Ok(Annotation {
        image_id,
        filename,
        path,
        size,
        boxes,
    })
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Coordinates are written in shortest round-trip form, so parsing the
/// output gives back the same values.
pub fn write_voc(ann: &Annotation) -> String {
    let mut out = String::from("<annotation>\n");
    let filename = ann.filename.clone().unwrap_or_else(|| ann.image_id.clone());
    out.push_str(&format!("\t<filename>{}</filename>\n", escape(&filename)));
    if let Some(p) = &ann.path {
        out.push_str(&format!("\t<path>{}</path>\n", escape(p)));
    }
    if let Some((w, h, d)) = ann.size {
        out.push_str(&format!(
            "\t<size>\n\t\t<width>{w}</width>\n\t\t<height>{h}</height>\n\t\t<depth>{d}</depth>\n\t</size>\n"
        ));
    }
    for b in &ann.boxes {
        out.push_str(&format!(
            "\t<object>\n\t\t<name>{}</name>\n\t\t<bndbox>\n\t\t\t<xmin>{}</xmin>\n\t\t\t<ymin>{}</ymin>\n\t\t\t<xmax>{}</xmax>\n\t\t\t<ymax>{}</ymax>\n\t\t</bndbox>\n\t</object>\n",
            escape(&b.label),
            b.bbox.xmin,
            b.bbox.ymin,
            b.bbox.xmax,
            b.bbox.ymax
        ));
    }
    out.push_str("</annotation>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const ONE: &str = r#"<annotation>
	<folder>images</folder>
	<filename>panel_017.jpg</filename>
	<size><width>640</width><height>480</height><depth>3</depth></size>
	<segmented>0</segmented>
	<object>
		<name>droppings</name>
		<pose>Unspecified</pose>
		<truncated>0</truncated>
		<difficult>0</difficult>
		<bndbox><xmin>48</xmin><ymin>240</ymin><xmax>195</xmax><ymax>371</ymax></bndbox>
	</object>
</annotation>"#;

    #[test]
    fn single_object() {
        let a = parse_voc(ONE).unwrap();
        assert_eq!(a.image_id, "panel_017");
        assert_eq!(a.size, Some((640, 480, 3)));
        assert_eq!(a.boxes.len(), 1);
        assert_eq!(a.boxes[0].label, "droppings");
        assert_eq!(a.boxes[0].bbox, BoundingBox::new(48.0, 240.0, 195.0, 371.0).unwrap());
    }

    #[test]
    fn no_objects() {
        let a = parse_voc("<annotation><filename>x.png</filename></annotation>").unwrap();
        assert!(a.boxes.is_empty());
    }

    #[test]
    fn degenerate_and_missing_fields() {
        let bad = ONE.replace("<xmax>195</xmax>", "<xmax>48</xmax>");
        assert!(matches!(parse_voc(&bad), Err(DetectionError::DegenerateBox { .. })));
        let missing = ONE.replace("<ymin>240</ymin>", "");
        assert_eq!(parse_voc(&missing), Err(DetectionError::MissingElement("ymin")));
        let nan = ONE.replace("<ymin>240</ymin>", "<ymin>abc</ymin>");
        assert!(matches!(parse_voc(&nan), Err(DetectionError::BadNumber { field: "ymin", .. })));
        assert!(matches!(parse_voc("<annotation>"), Err(DetectionError::Xml(_))));
        assert_eq!(parse_voc("<foo/>"), Err(DetectionError::MissingElement("annotation")));
    }

    #[test]
    fn fractional_coordinates() {
        let x = ONE.replace("<xmin>48</xmin>", "<xmin>48.25</xmin>");
        assert_eq!(parse_voc(&x).unwrap().boxes[0].bbox.xmin, 48.25);
    }

    proptest! {
        #[test]
        fn write_then_parse_preserves_boxes(
            raw in prop::collection::vec((-1e4f64..1e4, -1e4f64..1e4, 1e-3f64..1e3, 1e-3f64..1e3, "[a-zA-Z<&]{1,8}"), 0..5)
        ) {
            let boxes: Vec<LabeledBox> = raw
                .into_iter()
                .map(|(x, y, w, h, label)| LabeledBox { label, bbox: BoundingBox::new(x, y, x + w, y + h).unwrap() })
                .collect();
            let ann = Annotation {
                image_id: "img".into(),
                filename: Some("img.jpg".into()),
                path: None,
                size: Some((10, 10, 3)),
                boxes,
            };
            let back = parse_voc(&write_voc(&ann)).unwrap();
            prop_assert_eq!(back, ann);
        }
    }
}
