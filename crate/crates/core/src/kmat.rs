//! Small dense matrices over K with floating p-adic entries.

use crate::error::{Error, Result};
use crate::padic::{PadicValue, RingSpec};

#[derive(Clone, Debug, PartialEq)]
pub struct KMatrix {
    rows: usize,
    cols: usize,
    data: Vec<PadicValue>,
}

impl KMatrix {
    pub fn zeros(ring: &RingSpec, rows: usize, cols: usize) -> Self {
        KMatrix {
            rows,
            cols,
            data: vec![ring.k_zero(); rows * cols],
        }
    }

    pub fn identity(ring: &RingSpec, n: usize) -> Self {
        let mut m = Self::zeros(ring, n, n);
        for i in 0..n {
            m.set(i, i, ring.k_one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<PadicValue>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        KMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<PadicValue>]) -> Self {
        let c = cols.len();
        let r = cols.first().map_or(0, |x| x.len());
        let mut data = Vec::with_capacity(r * c);
        for i in 0..r {
            for col in cols {
                data.push(col[i]);
            }
        }
        KMatrix {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> PadicValue {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: PadicValue) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<PadicValue> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn mul(&self, ring: &RingSpec, other: &KMatrix) -> KMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = KMatrix::zeros(ring, self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut s = ring.k_zero();
                for k in 0..self.cols {
                    s = ring.k_add(&s, &ring.k_mul(&self.get(i, k), &other.get(k, j)));
                }
                out.set(i, j, s);
            }
        }
        out
    }

    pub fn mul_vec(&self, ring: &RingSpec, v: &[PadicValue]) -> Vec<PadicValue> {
        (0..self.rows)
            .map(|i| {
                let mut s = ring.k_zero();
                for (k, x) in v.iter().enumerate() {
                    s = ring.k_add(&s, &ring.k_mul(&self.get(i, k), x));
                }
                s
            })
            .collect()
    }

    pub fn scale(&self, ring: &RingSpec, c: &PadicValue) -> KMatrix {
        KMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| ring.k_mul(x, c)).collect(),
        }
    }

    pub fn sub(&self, ring: &RingSpec, other: &KMatrix) -> KMatrix {
        KMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| ring.k_sub(a, b))
                .collect(),
        }
    }

    /// Gaussian elimination with the pivot of least valuation.
    fn eliminate(&self, ring: &RingSpec, rhs: Option<&KMatrix>) -> Result<(PadicValue, Option<KMatrix>)> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut b = rhs.cloned();
        let mut det = ring.k_one();
        for col in 0..n {
            let mut best: Option<usize> = None;
            for r in col..n {
                let v = a.get(r, col);
                if v.is_zero() {
                    continue;
                }
                if best.map_or(true, |b| v.valuation() < a.get(b, col).valuation()) {
                    best = Some(r);
                }
            }
            let Some(piv) = best else {
                let bound = (col..n)
                    .map(|r| a.get(r, col).valuation())
                    .min()
                    .unwrap_or(0);
                return Ok((PadicValue::zero_to(det.valuation().saturating_add(bound)), None));
            };
            if piv != col {
                for j in 0..n {
                    let t = a.get(piv, j);
                    a.set(piv, j, a.get(col, j));
                    a.set(col, j, t);
                }
                if let Some(b) = b.as_mut() {
                    for j in 0..b.cols {
                        let t = b.get(piv, j);
                        b.set(piv, j, b.get(col, j));
                        b.set(col, j, t);
                    }
                }
                det = ring.k_neg(&det);
            }
            let pv = a.get(col, col);
            det = ring.k_mul(&det, &pv);
            let inv = ring.k_inv(&pv)?;
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = ring.k_mul(&a.get(r, col), &inv);
                if f.is_zero() && f.valuation() > crate::padic::EXACT / 2 {
                    continue;
                }
                for j in col..n {
                    let v = ring.k_sub(&a.get(r, j), &ring.k_mul(&f, &a.get(col, j)));
                    a.set(r, j, v);
                }
                if let Some(b) = b.as_mut() {
                    for j in 0..b.cols {
                        let v = ring.k_sub(&b.get(r, j), &ring.k_mul(&f, &b.get(col, j)));
                        b.set(r, j, v);
                    }
                }
            }
        }
        if let Some(b) = b.as_mut() {
            for r in 0..n {
                let inv = ring.k_inv(&a.get(r, r))?;
                for j in 0..b.cols {
                    b.set(r, j, ring.k_mul(&b.get(r, j), &inv));
                }
            }
        }
        Ok((det, b))
    }

    pub fn det(&self, ring: &RingSpec) -> PadicValue {
        if self.rows == 0 {
            return ring.k_one();
        }
        self.eliminate(ring, None).map(|r| r.0).unwrap_or(PadicValue::zero_to(0))
    }

    pub fn solve(&self, ring: &RingSpec, rhs: &KMatrix) -> Result<KMatrix> {
        match self.eliminate(ring, Some(rhs))? {
            (_, Some(x)) => Ok(x),
            _ => Err(Error::Degenerate("singular matrix".into())),
        }
    }

    pub fn inverse(&self, ring: &RingSpec) -> Result<KMatrix> {
        self.solve(ring, &KMatrix::identity(ring, self.rows))
    }

    /// Coefficients e_1, …, e_n with det(X − A) = Σ (−1)^k e_k X^{n−k}:
    /// e_k is the sum of the k×k principal minors.
    pub fn char_coeffs(&self, ring: &RingSpec) -> Vec<PadicValue> {
        let n = self.rows;
        let mut out = vec![];
        for k in 1..=n {
            let mut s = ring.k_zero();
            for mask in 0u32..(1 << n) {
                if mask.count_ones() as usize != k {
                    continue;
                }
                let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
                let rows: Vec<Vec<PadicValue>> = idx
                    .iter()
                    .map(|&i| idx.iter().map(|&j| self.get(i, j)).collect())
                    .collect();
                s = ring.k_add(&s, &KMatrix::from_rows(rows).det(ring));
            }
            out.push(s);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::make_ring;

    fn m(ring: &RingSpec, rows: &[&[i128]]) -> KMatrix {
        KMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| ring.k_from_int(x)).collect())
                .collect(),
        )
    }

    #[test]
    fn determinant_and_inverse() {
        let ring = make_ring(3, 1, 12).unwrap();
        let a = m(&ring, &[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        let d = a.det(&ring);
        assert!(ring.k_sub(&d, &ring.k_from_int(18)).is_zero());
        let inv = a.inverse(&ring).unwrap();
        let id = a.mul(&ring, &inv);
        let diff = id.sub(&ring, &KMatrix::identity(&ring, 3));
        for i in 0..3 {
            for j in 0..3 {
                assert!(diff.get(i, j).valuation() >= 8);
            }
        }
    }

    #[test]
    fn characteristic_coefficients() {
        let ring = make_ring(5, 1, 10).unwrap();
        let a = m(&ring, &[&[1, 2], &[3, 4]]);
        let e = a.char_coeffs(&ring);
        assert!(ring.k_sub(&e[0], &ring.k_from_int(5)).is_zero());
        assert!(ring.k_sub(&e[1], &ring.k_from_int(-2)).is_zero());
    }

    #[test]
    fn singular_detected() {
        let ring = make_ring(5, 1, 10).unwrap();
        let a = m(&ring, &[&[1, 2], &[2, 4]]);
        assert!(a.det(&ring).is_zero());
        assert!(a.inverse(&ring).is_err());
    }
}
