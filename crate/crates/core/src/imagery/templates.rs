use std::fs;
use std::path::Path;

use super::{load_pgm, GrayImage, DIGITS};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FontTemplate {
    /// File stem, e.g. `dejavu-sans` for `templates/3/dejavu-sans.pgm`.
    pub name: String,
    pub image: GrayImage,
}

/// Font templates per digit, loaded from `<root>/<digit>/<font>.pgm`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TemplateSet {
    pub per_digit: Vec<Vec<FontTemplate>>,
}

impl TemplateSet {
    pub fn digit(&self, digit: usize) -> &[FontTemplate] {
        &self.per_digit[digit]
    }
}

/// Loads every `*.pgm` under each digit directory, sorted by file name.
pub fn load_templates(root: impl AsRef<Path>) -> Result<TemplateSet> {
    let root = root.as_ref();
    let mut per_digit = Vec::with_capacity(DIGITS);
    for digit in 0..DIGITS {
        let dir = root.join(digit.to_string());
        if !dir.is_dir() {
            return Err(Error::Config(format!(
                "missing template directory {}",
                dir.display()
            )));
        }
        let mut files: Vec<_> = fs::read_dir(&dir)
            .map_err(|e| Error::io(&dir, e))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|ext| ext == "pgm"))
            .collect();
        files.sort();
        if files.is_empty() {
            return Err(Error::Config(format!(
                "template directory {} holds no .pgm files",
                dir.display()
            )));
        }
        let fonts = files
            .iter()
            .map(|path| {
                Ok(FontTemplate {
                    name: path
                        .file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_default(),
                    image: load_pgm(path)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        per_digit.push(fonts);
    }
    Ok(TemplateSet { per_digit })
}
