use crate::linalg::{c, CMatrix};

/// Orthonormal hermitean operator basis (`Tr(B_a B_b) = δ_ab`): the scaled
/// identity followed by the generalized Gell-Mann matrices.
#[derive(Debug, Clone)]
pub struct HermitianBasis {
    dim: usize,
    elements: Vec<CMatrix>,
}

impl HermitianBasis {
    pub fn new(dim: usize) -> Self {
        let mut elements = Vec::with_capacity(dim * dim);
        elements.push(CMatrix::identity(dim, dim).unscale((dim as f64).sqrt()));
        for l in 1..dim {
            let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
            let mut m = CMatrix::zeros(dim, dim);
            for j in 0..l {
                m[(j, j)] = c(norm, 0.0);
            }
            m[(l, l)] = c(-(l as f64) * norm, 0.0);
            elements.push(m);
        }
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for j in 0..dim {
            for k in (j + 1)..dim {
                let mut sym = CMatrix::zeros(dim, dim);
                sym[(j, k)] = c(h, 0.0);
                sym[(k, j)] = c(h, 0.0);
                elements.push(sym);
                let mut anti = CMatrix::zeros(dim, dim);
                anti[(j, k)] = c(0.0, -h);
                anti[(k, j)] = c(0.0, h);
                elements.push(anti);
            }
        }
        HermitianBasis { dim, elements }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, a: usize) -> &CMatrix {
        &self.elements[a]
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    /// Real coordinates `Tr(B_a A)` of a hermitean matrix.
    pub fn coords(&self, m: &CMatrix) -> Vec<f64> {
        self.elements
            .iter()
            .map(|b| {
                let mut acc = 0.0;
                for i in 0..self.dim {
                    for k in 0..self.dim {
                        let z = b[(i, k)];
                        if z.re != 0.0 || z.im != 0.0 {
                            acc += (z * m[(k, i)]).re;
                        }
                    }
                }
                acc
            })
            .collect()
    }

    /// `Σ_a x_a B_a`.
    pub fn from_coords(&self, x: &[f64]) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for (b, &xa) in self.elements.iter().zip(x) {
            m += b.scale(xa);
        }
        m
    }
}
