//! Collection files: CSV with header `id,l,b,h[,true_volume]`.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::BoxDims;

pub fn load_collection(path: &Path) -> Result<Vec<BoxDims>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_collection(file, path)
}

/// Parses a collection; `origin` only labels error messages.
pub fn read_collection(reader: impl Read, origin: &Path) -> Result<Vec<BoxDims>> {
    let fail = |line: usize, message: String| Error::Collection { path: origin.to_path_buf(), line, message };
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(reader);
    let headers = rdr.headers().map_err(|e| fail(1, e.to_string()))?.clone();
    let names: Vec<&str> = headers.iter().collect();
    let with_volume = match names.as_slice() {
        ["id", "l", "b", "h"] => false,
        ["id", "l", "b", "h", "true_volume"] => true,
        _ => return Err(fail(1, format!("expected header `id,l,b,h[,true_volume]`, got `{}`", names.join(",")))),
    };
    let mut boxes = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| fail(e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != names.len() && !(with_volume && record.len() == 4) {
            return Err(fail(line, format!("expected {} fields, got {}", names.len(), record.len())));
        }
        let id: u32 = record[0].parse().map_err(|_| fail(line, format!("box id `{}` is not a non-negative integer", &record[0])))?;
        let mut sides = [0.0; 3];
        for (k, side) in sides.iter_mut().enumerate() {
            let text = &record[k + 1];
            *side = text.parse().map_err(|_| fail(line, format!("dimension `{text}` is not a number")))?;
        }
        let mut item = BoxDims::from_measured(id, sides[0], sides[1], sides[2]).map_err(|e| fail(line, e.to_string()))?;
        if let Some(text) = record.get(4).filter(|t| !t.is_empty()) {
            let v: f64 = text.parse().map_err(|_| fail(line, format!("true volume `{text}` is not a number")))?;
            item = item.with_true_volume(v).map_err(|e| fail(line, e.to_string()))?;
        }
        boxes.push(item);
    }
    Ok(boxes)
}

pub fn save_collection(boxes: &[BoxDims], path: &Path) -> Result<()> {
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(collection_to_csv(boxes).as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn collection_to_csv(boxes: &[BoxDims]) -> String {
    let with_volume = boxes.iter().any(|b| b.true_volume.is_some());
    let mut out = String::from(if with_volume { "id,l,b,h,true_volume\n" } else { "id,l,b,h\n" });
    for b in boxes {
        out.push_str(&format!("{},{},{},{}", b.id, b.l, b.b, b.h));
        if with_volume {
            out.push(',');
            if let Some(v) = b.true_volume {
                out.push_str(&v.to_string());
            }
        }
        out.push('\n');
    }
    out
}
