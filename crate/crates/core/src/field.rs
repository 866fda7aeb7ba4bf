use crate::discretization::{DiscreteDomain, NodeClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Support {
    /// Defined at every grid node.
    Full,
    /// Defined on Ω∖B̄ and extended by zero onto B̄.
    Habitat,
}

/// Grid function over all nodes of a [`DiscreteDomain`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    values: Vec<f64>,
    support: Support,
}

impl Field {
    pub fn new(values: Vec<f64>, support: Support) -> Self {
        Field { values, support }
    }

    pub fn zeros(len: usize, support: Support) -> Self {
        Field::new(vec![0.0; len], support)
    }

    pub fn constant(len: usize, value: f64) -> Self {
        Field::new(vec![value; len], Support::Full)
    }

    /// Sample `f` at the grid nodes.
    pub fn from_fn(g: &DiscreteDomain, f: impl Fn(&[f64]) -> f64) -> Self {
        Field::new(
            (0..g.len()).map(|i| f(&g.coord(i))).collect(),
            Support::Full,
        )
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Zero the field on B̄ and tag it as habitat-supported.
    pub fn restricted_to_habitat(mut self, g: &DiscreteDomain) -> Self {
        for (v, c) in self.values.iter_mut().zip(g.classes()) {
            if *c != NodeClass::Habitat {
                *v = 0.0;
            }
        }
        self.support = Support::Habitat;
        self
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn l2_norm(&self, g: &DiscreteDomain) -> f64 {
        g.weights()
            .iter()
            .zip(&self.values)
            .map(|(w, v)| w * v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// Trapezoidal `∫|∇v|²` with one-sided differences on grid edges.
    pub fn gradient_energy(&self, g: &DiscreteDomain) -> f64 {
        let mut acc = 0.0;
        g.for_each_edge(|p, q, e| {
            let dv = self.values[q] - self.values[p];
            acc += e * dv * dv;
        });
        acc
    }

    pub fn h1_norm(&self, g: &DiscreteDomain) -> f64 {
        let l2 = self.l2_norm(g);
        (l2 * l2 + self.gradient_energy(g)).sqrt()
    }

    /// `(1/|Ω|) ∫ v`.
    pub fn mean(&self, g: &DiscreteDomain) -> f64 {
        g.integrate(&self.values) / g.omega_measure()
    }

    pub fn sub(&self, other: &Field) -> Field {
        Field::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
            Support::Full,
        )
    }

    pub fn scale(&mut self, alpha: f64) {
        self.values.iter_mut().for_each(|v| *v *= alpha);
    }

    /// Minimum over the Ω∖B̄ nodes.
    pub fn min_on_habitat(&self, g: &DiscreteDomain) -> f64 {
        self.values
            .iter()
            .zip(g.classes())
            .filter(|(_, c)| **c == NodeClass::Habitat)
            .map(|(v, _)| *v)
            .fold(f64::INFINITY, f64::min)
    }
}
