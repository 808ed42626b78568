use nalgebra::DVector;

/// Orthonormal frame of the tangent plane `{v : v·n = 0}`, stored implicitly
/// as a Householder reflection that maps `n` onto a signed coordinate axis.
#[derive(Clone, Debug)]
pub struct TangentFrame {
    householder: DVector<f64>,
    scale: f64,
    pivot: usize,
}

impl TangentFrame {
    /// `normal` must be a unit vector of dimension ≥ 2.
    pub fn new(normal: &DVector<f64>) -> Self {
        let pivot = normal.iamax();
        let mut v = normal.clone();
        v[pivot] += normal[pivot].signum();
        let scale = 2.0 / v.norm_squared();
        Self {
            householder: v,
            scale,
            pivot,
        }
    }

    pub fn dim(&self) -> usize {
        self.householder.len()
    }

    /// Maps tangent coordinates `u ∈ R^{n−1}` to the tangent vector `Σ u_i e_i`.
    pub fn embed(&self, u: &[f64]) -> DVector<f64> {
        let n = self.dim();
        debug_assert_eq!(u.len() + 1, n);
        let mut padded = DVector::zeros(n);
        let mut it = u.iter();
        for (i, slot) in padded.iter_mut().enumerate() {
            if i != self.pivot {
                *slot = *it.next().unwrap();
            }
        }
        let coef = self.scale * self.householder.dot(&padded);
        padded.axpy(-coef, &self.householder, 1.0);
        padded
    }

    /// The `n − 1` basis vectors, in the order used by [`TangentFrame::embed`].
    pub fn basis(&self) -> Vec<DVector<f64>> {
        let n = self.dim();
        (0..n - 1)
            .map(|i| {
                let mut u = vec![0.0; n - 1];
                u[i] = 1.0;
                self.embed(&u)
            })
            .collect()
    }
}
