//! Compressed sparse row matrices.

use std::io::Write;

use rayon::prelude::*;

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Zero matrix with the given sorted, deduplicated column pattern per row.
    pub fn from_pattern(rows: &[Vec<usize>]) -> Self {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        row_ptr.push(0);
        let mut cols = Vec::with_capacity(rows.iter().map(Vec::len).sum());
        for r in rows {
            cols.extend_from_slice(r);
            row_ptr.push(cols.len());
        }
        let vals = vec![0.0; cols.len()];
        CsrMatrix {
            n: rows.len(),
            row_ptr,
            cols,
            vals,
        }
    }

    /// Builds from unsorted triplets, summing duplicates in input order.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, v) in triplets {
            rows[i].push((j, v));
        }
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for mut r in rows {
            r.sort_by_key(|e| e.0);
            for (j, v) in r {
                if cols.len() > *row_ptr.last().unwrap() && *cols.last().unwrap() == j {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        CsrMatrix {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            n,
            row_ptr: (0..=n).collect(),
            cols: (0..n).collect(),
            vals: vec![1.0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    fn position(&self, i: usize, j: usize) -> Option<usize> {
        let lo = self.row_ptr[i];
        self.cols[lo..self.row_ptr[i + 1]]
            .binary_search(&j)
            .ok()
            .map(|k| lo + k)
    }

    /// Adds `v` to an entry of the pattern. Panics if `(i, j)` is not stored.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.position(i, j).expect("entry outside sparsity pattern");
        self.vals[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.vals[k])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut()
            .with_min_len(512)
            .enumerate()
            .for_each(|(i, yi)| {
                let (c, v) = self.row(i);
                *yi = c.iter().zip(v).map(|(&j, &a)| a * x[j]).sum();
            });
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec(x, &mut y);
        y
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).1.iter().sum()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|a_ij - a_ji|` relative to the largest entry.
    pub fn symmetry_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                d = d.max((a - self.get(j, i)).abs());
            }
        }
        let m = self.max_abs();
        if m > 0.0 {
            d / m
        } else {
            d
        }
    }

    /// Principal submatrix on the indices with `map[i] = Some(new index)`.
    pub fn restrict(&self, map: &[Option<usize>], m: usize) -> CsrMatrix {
        let mut row_ptr = vec![0; m + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut order: Vec<(usize, usize)> = map
            .iter()
            .enumerate()
            .filter_map(|(i, k)| k.map(|k| (k, i)))
            .collect();
        order.sort_unstable();
        for (k, i) in order {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                if let Some(jj) = map[j] {
                    cols.push(jj);
                    vals.push(a);
                }
            }
            row_ptr[k + 1] = cols.len();
        }
        // columns stay sorted when the map is monotone; sort defensively otherwise
        let mut out = CsrMatrix {
            n: m,
            row_ptr,
            cols,
            vals,
        };
        out.sort_rows();
        out
    }

    fn sort_rows(&mut self) {
        for i in 0..self.n {
            let r = self.row_ptr[i]..self.row_ptr[i + 1];
            if self.cols[r.clone()].windows(2).all(|w| w[0] < w[1]) {
                continue;
            }
            let mut e: Vec<(usize, f64)> = self.cols[r.clone()]
                .iter()
                .copied()
                .zip(self.vals[r.clone()].iter().copied())
                .collect();
            e.sort_by_key(|p| p.0);
            for (k, (c, v)) in r.zip(e) {
                self.cols[k] = c;
                self.vals[k] = v;
            }
        }
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut d = nalgebra::DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                d[(i, j)] += a;
            }
        }
        d
    }

    /// Writes the matrix in Matrix Market coordinate format (lower triangle,
    /// symmetric flag).
    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let lower: usize = (0..self.n)
            .map(|i| self.row(i).0.iter().filter(|&&j| j <= i).count())
            .sum();
        writeln!(w, "%%MatrixMarket matrix coordinate real symmetric")?;
        writeln!(w, "{} {} {}", self.n, self.n, lower)?;
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                if j <= i {
                    writeln!(w, "{} {} {:.17e}", i + 1, j + 1, a)?;
                }
            }
        }
        Ok(())
    }
}

pub fn write_vector_market<W: Write>(mut w: W, v: &[f64]) -> std::io::Result<()> {
    writeln!(w, "%%MatrixMarket matrix array real general")?;
    writeln!(w, "{} 1", v.len())?;
    for x in v {
        writeln!(w, "{:.17e}", x)?;
    }
    Ok(())
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
