//! Plain-text matrix files: a `w h` header line followed by `h` rows of `w`
//! whitespace-separated values. Count maps use the same layout with integers.

use std::fs;
use std::path::Path;

use poisprox_core::{CountMap, ImageGrid};

use crate::error::{Error, Result};

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Parses the header and rows, calling `cell` for every token.
fn parse_grid<T>(
    path: &Path,
    text: &str,
    mut cell: impl FnMut(&str) -> std::result::Result<T, String>,
) -> Result<(usize, usize, Vec<T>)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_error(path, 1, "empty file"))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| parse_error(path, hline, format!("header '{header}' is not 'w h'")))?;
    let [w, h] = dims[..] else {
        return Err(parse_error(
            path,
            hline,
            format!("header '{header}' is not 'w h'"),
        ));
    };
    if w == 0 || h == 0 {
        return Err(parse_error(path, hline, "dimensions must be positive"));
    }
    let mut values = Vec::with_capacity(w * h);
    let mut rows = 0;
    for (lineno, line) in lines {
        rows += 1;
        if rows > h {
            return Err(parse_error(path, lineno, format!("more than {h} rows")));
        }
        let before = values.len();
        for tok in line.split_whitespace() {
            values.push(cell(tok).map_err(|m| parse_error(path, lineno, m))?);
        }
        if values.len() - before != w {
            return Err(parse_error(
                path,
                lineno,
                format!("expected {w} values, found {}", values.len() - before),
            ));
        }
    }
    if rows != h {
        return Err(parse_error(
            path,
            text.lines().count(),
            format!("expected {h} rows, found {rows}"),
        ));
    }
    Ok((w, h, values))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Reads a real matrix without interpreting it as an image (PSF files).
pub fn load_matrix(path: &Path) -> Result<ImageGrid> {
    load_image(path)
}

pub fn load_image(path: &Path) -> Result<ImageGrid> {
    let text = read(path)?;
    let (w, h, px) = parse_grid(path, &text, |tok| {
        let v: f64 = tok
            .parse()
            .map_err(|_| format!("'{tok}' is not a number"))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("'{tok}' is not finite"))
        }
    })?;
    Ok(ImageGrid::new(w, h, px)?)
}

pub fn load_counts(path: &Path) -> Result<CountMap> {
    let text = read(path)?;
    let (w, h, counts) = parse_grid(path, &text, |tok| {
        let v: i64 = tok
            .parse()
            .map_err(|_| format!("'{tok}' is not an integer count"))?;
        if v < 0 {
            Err(format!("negative count {v}"))
        } else {
            Ok(v as u64)
        }
    })?;
    Ok(CountMap::new(w, h, counts)?)
}

fn write_grid<T: std::fmt::Display>(path: &Path, w: usize, values: &[T]) -> Result<()> {
    let h = values.len() / w;
    let mut out = format!("{w} {h}\n");
    for row in values.chunks(w) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Writes with shortest round-trip formatting, so reloading is exact.
pub fn save_image(img: &ImageGrid, path: &Path) -> Result<()> {
    write_grid(path, img.width(), img.pixels())
}

pub fn save_counts(counts: &CountMap, path: &Path) -> Result<()> {
    write_grid(path, counts.width(), counts.counts())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_row_major() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.txt");
        fs::write(&p, "2 2\n1 2\n3 4\n").unwrap();
        assert_eq!(load_image(&p).unwrap().pixels(), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn malformed_files_report_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.txt");
        fs::write(&p, "2 2\n1 2\n3 x\n").unwrap();
        match load_image(&p) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        fs::write(&p, "2 2\n1 2 3\n3 4\n").unwrap();
        assert!(matches!(load_image(&p), Err(Error::Parse { line: 2, .. })));
        fs::write(&p, "2 3\n1 2\n").unwrap();
        assert!(load_image(&p).is_err());
        assert!(load_image(&dir.path().join("missing.txt")).is_err());
    }

    #[test]
    fn negative_count_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.txt");
        fs::write(&p, "2 1\n3 -1\n").unwrap();
        assert!(matches!(load_counts(&p), Err(Error::Parse { line: 2, .. })));
        fs::write(&p, "2 1\n3 1.5\n").unwrap();
        assert!(load_counts(&p).is_err());
        fs::write(&p, "2 1\n3 7\n").unwrap();
        assert_eq!(load_counts(&p).unwrap().counts(), &[3, 7]);
    }
}
