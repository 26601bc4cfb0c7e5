//! Regenerates `data/synthetic_200.csv`: 200 candidates in [0, 1]^4, an HF
//! column with its maximum planted at row `c137`, and an LF column that is
//! an exact affine map of HF.
//!
//! cargo run --example make_synthetic_table -- data/synthetic_200.csv

use std::io::Write;

use mfbo::rng::RngStream;

const ROWS: usize = 200;
const PLANTED: usize = 137;
const PEAK: [f64; 4] = [0.7, 0.3, 0.6, 0.4];
const DECOY: [f64; 4] = [0.2, 0.8, 0.2, 0.7];

fn bump(x: &[f64], c: &[f64], width: f64) -> f64 {
    let d2: f64 = x.iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum();
    (-d2 / (2.0 * width * width)).exp()
}

fn hf(x: &[f64]) -> f64 {
    bump(x, &PEAK, 0.25) + 0.4 * bump(x, &DECOY, 0.15)
}

fn main() -> std::io::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "data/synthetic_200.csv".into());
    let mut rng = RngStream::new(200);
    let mut out = std::io::BufWriter::new(std::fs::File::create(&path)?);
    writeln!(out, "id,x0,x1,x2,x3,hf,lf")?;
    for i in 0..ROWS {
        let x: Vec<f64> = if i == PLANTED {
            PEAK.to_vec()
        } else {
            (0..4).map(|_| (rng.uniform() * 1e4).round() / 1e4).collect()
        };
        let y = hf(&x);
        writeln!(out, "c{i:03},{},{},{},{},{y},{}", x[0], x[1], x[2], x[3], 0.6 * y - 0.1)?;
    }
    out.flush()?;
    eprintln!("wrote {path}");
    Ok(())
}
