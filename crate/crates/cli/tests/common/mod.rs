#![allow(dead_code)]

use std::path::{Path, PathBuf};

use westervelt_core::mesh::write_off;
use westervelt_core::prelude::*;

pub fn write_mesh(dir: &Path, name: &str, mesh: &SimplicialMesh) -> PathBuf {
    let path = dir.join(name);
    let f = std::fs::File::create(&path).unwrap();
    write_off(mesh, std::io::BufWriter::new(f)).unwrap();
    path
}

pub fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}

/// (step, time, values)
pub type ProbeRow = (u64, f64, Vec<f64>);

/// Header and rows of a probe CSV.
pub fn read_probes(path: &Path) -> (Vec<String>, Vec<ProbeRow>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| {
            let rec = rec.unwrap();
            let step = rec[0].parse().unwrap();
            let time = rec[1].parse().unwrap();
            let values = rec.iter().skip(2).map(|x| x.parse().unwrap()).collect();
            (step, time, values)
        })
        .collect();
    (header, rows)
}

/// Independent leapfrog for `p_tt = c^2 (p_xx + p_yy)` on an `(n+1)^2` node
/// array with mirrored ghost nodes (zero normal derivative).
pub struct Leapfrog {
    pub n: usize,
    pub courant2: f64,
    pub prev: Vec<f64>,
    pub cur: Vec<f64>,
}

impl Leapfrog {
    pub fn new(n: usize, c: f64, dt: f64, ds: f64) -> Self {
        let w = n + 1;
        Leapfrog {
            n,
            courant2: (c * dt / ds).powi(2),
            prev: vec![0.0; w * w],
            cur: vec![0.0; w * w],
        }
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * (self.n + 1) + i
    }

    pub fn step(&mut self) {
        let n = self.n as isize;
        let w = self.n + 1;
        let mirror = |k: isize| {
            if k < 0 {
                -k
            } else if k > n {
                2 * n - k
            } else {
                k
            }
        };
        let at = |f: &[f64], i: isize, j: isize| f[mirror(j) as usize * w + mirror(i) as usize];
        let mut next = vec![0.0; w * w];
        for j in 0..=n {
            for i in 0..=n {
                let c = at(&self.cur, i, j);
                let lap = at(&self.cur, i + 1, j)
                    + at(&self.cur, i - 1, j)
                    + at(&self.cur, i, j + 1)
                    + at(&self.cur, i, j - 1)
                    - 4.0 * c;
                let k = j as usize * w + i as usize;
                next[k] = 2.0 * c - self.prev[k] + self.courant2 * lap;
            }
        }
        self.prev = std::mem::replace(&mut self.cur, next);
    }
}
