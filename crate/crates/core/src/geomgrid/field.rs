//! Plain field storage: one value, one small vector, or one small matrix per
//! grid node. Fields do not carry their grid; the owning container does.

/// One f64 per node.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField(pub Vec<f64>);

impl ScalarField {
    pub fn zeros(len: usize) -> Self {
        ScalarField(vec![0.0; len])
    }

    pub fn constant(len: usize, v: f64) -> Self {
        ScalarField(vec![v; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Max |value| ignoring NaN markers.
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .filter(|x| !x.is_nan())
            .fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}

/// k components per node, node-major.
#[derive(Debug, Clone, PartialEq)]
pub struct VecField {
    pub k: usize,
    pub data: Vec<f64>,
}

impl VecField {
    pub fn zeros(k: usize, len: usize) -> Self {
        VecField {
            k,
            data: vec![0.0; k * len],
        }
    }

    pub fn at(&self, node: usize) -> &[f64] {
        &self.data[node * self.k..(node + 1) * self.k]
    }

    pub fn at_mut(&mut self, node: usize) -> &mut [f64] {
        &mut self.data[node * self.k..(node + 1) * self.k]
    }

    pub fn nodes(&self) -> usize {
        if self.k == 0 {
            0
        } else {
            self.data.len() / self.k
        }
    }
}

/// k x k row-major matrix per node.
#[derive(Debug, Clone, PartialEq)]
pub struct MatField {
    pub k: usize,
    pub data: Vec<f64>,
}

impl MatField {
    pub fn zeros(k: usize, len: usize) -> Self {
        MatField {
            k,
            data: vec![0.0; k * k * len],
        }
    }

    pub fn at(&self, node: usize) -> &[f64] {
        let kk = self.k * self.k;
        &self.data[node * kk..(node + 1) * kk]
    }

    pub fn at_mut(&mut self, node: usize) -> &mut [f64] {
        let kk = self.k * self.k;
        &mut self.data[node * kk..(node + 1) * kk]
    }
}
