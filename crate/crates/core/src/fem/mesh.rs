use crate::error::{Error, Result};

/// Partition `0 = x_0 < x_1 < ... < x_N = length` of one pipe.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMesh {
    breakpoints: Vec<f64>,
}

impl EdgeMesh {
    pub fn new(breakpoints: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidMesh("need at least one element".into()));
        }
        if breakpoints[0] != 0.0 {
            return Err(Error::InvalidMesh("first breakpoint must be 0".into()));
        }
        if !breakpoints.windows(2).all(|w| w[1] > w[0]) || breakpoints.iter().any(|x| !x.is_finite())
        {
            return Err(Error::InvalidMesh(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(Self { breakpoints })
    }

    /// `n` elements of equal size on `[0, length]`.
    pub fn uniform(length: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMesh("need at least one element".into()));
        }
        if !(length > 0.0) {
            return Err(Error::InvalidMesh(format!("non-positive length {length}")));
        }
        let mut x: Vec<f64> = (0..=n).map(|i| length * i as f64 / n as f64).collect();
        x[n] = length;
        Self::new(x)
    }

    /// Uniform mesh with the fewest elements such that `h <= target`.
    pub fn with_max_size(length: f64, target: f64) -> Result<Self> {
        let n = (length / target - 1e-9).ceil().max(1.0) as usize;
        Self::uniform(length, n)
    }

    /// Splits every element in two.
    pub fn refined(&self) -> Self {
        let mut x = Vec::with_capacity(2 * self.breakpoints.len() - 1);
        for w in self.breakpoints.windows(2) {
            x.push(w[0]);
            x.push(0.5 * (w[0] + w[1]));
        }
        x.push(self.length());
        Self { breakpoints: x }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn num_elements(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn length(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    /// `[x_{n-1}, x_n]` of element `n` (zero based).
    pub fn element(&self, n: usize) -> (f64, f64) {
        (self.breakpoints[n], self.breakpoints[n + 1])
    }

    pub fn element_size(&self, n: usize) -> f64 {
        self.breakpoints[n + 1] - self.breakpoints[n]
    }

    /// Global mesh size `max h_n`.
    pub fn h(&self) -> f64 {
        (0..self.num_elements())
            .map(|n| self.element_size(n))
            .fold(0.0, f64::max)
    }

    /// Physical coordinate of reference point `xi` in element `n`.
    pub fn map(&self, n: usize, xi: f64) -> f64 {
        let (a, b) = self.element(n);
        0.5 * (a + b) + 0.5 * (b - a) * xi
    }

    /// Element containing `x` and the reference coordinate of `x` in it.
    /// Points on a breakpoint are assigned to the element on the left,
    /// except `x = 0`.
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let n = match self
            .breakpoints
            .binary_search_by(|b| b.partial_cmp(&x).unwrap())
        {
            Ok(0) => 0,
            Ok(i) => i - 1,
            Err(0) => 0,
            Err(i) => (i - 1).min(self.num_elements() - 1),
        };
        let (a, b) = self.element(n);
        (n, (2.0 * x - a - b) / (b - a))
    }

    /// True if every breakpoint of `self` is (up to round-off) a breakpoint
    /// of `fine`.
    pub fn is_refined_by(&self, fine: &EdgeMesh) -> bool {
        let tol = 1e-12 * self.length();
        (fine.length() - self.length()).abs() <= tol
            && self
                .breakpoints
                .iter()
                .all(|&x| fine.breakpoints.iter().any(|&y| (x - y).abs() <= tol))
    }
}
