#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tabrot_core::formats::write_dota_file;
use tabrot_core::{AnnotationRecord, QuadBox, RasterImage};

pub fn tabrot(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tabrot"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("tabrot binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// `n` small images of varying size under `root/img`, with one or two
/// clockwise tables each under `root/ann`.
pub fn dataset(root: &Path, n: u32) -> (PathBuf, PathBuf) {
    let (img, ann) = (root.join("img"), root.join("ann"));
    fs::create_dir_all(&img).unwrap();
    fs::create_dir_all(&ann).unwrap();
    for i in 0..n {
        let (w, h) = (48 + 9 * (i % 7), 36 + 5 * (i % 5));
        let pixels = (0..w * h * 3)
            .map(|k| ((k * 29 + i * 13) % 253) as u8)
            .collect();
        RasterImage::new(w, h, 3, pixels)
            .unwrap()
            .save_png(&img.join(format!("s{i:03}.png")))
            .unwrap();
        let (fw, fh) = (w as f64, h as f64);
        let mut recs = vec![AnnotationRecord::table(QuadBox::from_coords([
            3.0,
            2.0,
            fw * 0.55,
            2.0,
            fw * 0.55,
            fh - 3.0,
            3.0,
            fh - 3.0,
        ]))];
        if i % 3 == 0 {
            recs.push(AnnotationRecord::table(
                QuadBox::from_coords([
                    fw * 0.6,
                    4.0,
                    fw - 2.0,
                    4.0,
                    fw - 2.0,
                    fh * 0.5,
                    fw * 0.6,
                    fh * 0.5,
                ])
                .cyclic_shift(i as i64),
            ));
        }
        fs::write(ann.join(format!("s{i:03}.txt")), write_dota_file(&recs)).unwrap();
    }
    (img, ann)
}

/// Relative path and contents of every file under `root`, sorted.
pub fn tree(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((
                    p.strip_prefix(root).unwrap().to_path_buf(),
                    fs::read(&p).unwrap(),
                ));
            }
        }
    }
    out.sort();
    out
}
