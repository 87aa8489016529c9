//! Labeled register systems: ordered lists of named finite-dimensional registers.

use crate::error::{Error, Result};

pub const DEFAULT_DIM_CAP: usize = 4096;

/// Total-dimension cap: `CCLAB_DIM_CAP` if set, else 4096.
pub fn configured_cap() -> usize {
    std::env::var("CCLAB_DIM_CAP")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_DIM_CAP)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Register {
    pub name: String,
    pub dim: usize,
}

impl Register {
    pub fn new(name: impl Into<String>, dim: usize) -> Self {
        Register { name: name.into(), dim }
    }
}

/// Ordered sequence of distinct named registers. The joint space is indexed
/// row-major: the first register is the most significant digit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegisterSystem {
    regs: Vec<Register>,
    dim: usize,
}

impl RegisterSystem {
    pub fn new(regs: Vec<Register>) -> Result<Self> {
        Self::with_cap(regs, configured_cap())
    }

    pub fn with_cap(regs: Vec<Register>, cap: usize) -> Result<Self> {
        let mut dim = 1usize;
        for (i, r) in regs.iter().enumerate() {
            if r.dim == 0 {
                return Err(Error::Domain(format!("register {} has dim 0", r.name)));
            }
            if regs[..i].iter().any(|s| s.name == r.name) {
                return Err(Error::NameCollision(r.name.clone()));
            }
            dim = dim
                .checked_mul(r.dim)
                .ok_or(Error::DimCap { got: usize::MAX, cap })?;
        }
        if dim > cap {
            return Err(Error::DimCap { got: dim, cap });
        }
        Ok(RegisterSystem { regs, dim })
    }

    /// Convenience constructor from (name, dim) pairs.
    pub fn of(pairs: &[(&str, usize)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(n, d)| Register::new(n, d)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn registers(&self) -> &[Register] {
        &self.regs
    }

    pub fn len(&self) -> usize {
        self.regs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regs.is_empty()
    }

    pub fn names(&self) -> Vec<&str> {
        self.regs.iter().map(|r| r.name.as_str()).collect()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.regs.iter().any(|r| r.name == name)
    }

    pub fn position(&self, name: &str) -> Result<usize> {
        self.regs
            .iter()
            .position(|r| r.name == name)
            .ok_or_else(|| Error::UnknownRegister(name.to_string()))
    }

    /// Positions of `names` in system order (not argument order).
    pub fn positions_sorted(&self, names: &[&str]) -> Result<Vec<usize>> {
        let mut ps = Vec::with_capacity(names.len());
        for n in names {
            let p = self.position(n)?;
            if ps.contains(&p) {
                return Err(Error::Domain(format!("register {n} listed twice")));
            }
            ps.push(p);
        }
        ps.sort_unstable();
        Ok(ps)
    }

    pub fn dims(&self) -> Vec<usize> {
        self.regs.iter().map(|r| r.dim).collect()
    }

    /// Row-major strides: stride of the last register is 1.
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1usize; self.regs.len()];
        for i in (0..self.regs.len().saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.regs[i + 1].dim;
        }
        s
    }

    /// Subsystem holding `names`, in *system* order.
    pub fn subsystem(&self, names: &[&str]) -> Result<RegisterSystem> {
        let ps = self.positions_sorted(names)?;
        let regs: Vec<Register> = ps.iter().map(|&p| self.regs[p].clone()).collect();
        RegisterSystem::with_cap(regs, usize::MAX)
    }

    pub fn concat(&self, other: &RegisterSystem) -> Result<RegisterSystem> {
        let mut regs = self.regs.clone();
        for r in &other.regs {
            if self.contains(&r.name) {
                return Err(Error::NameCollision(r.name.clone()));
            }
            regs.push(r.clone());
        }
        RegisterSystem::with_cap(regs, usize::MAX)
    }

    /// Linear offsets of every joint assignment of the registers at `positions`
    /// (mixed-radix counting, most significant first), e.g. for embedding or
    /// tracing loops: `offsets[a] = Σ digit·stride`.
    pub fn offsets_of(&self, positions: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let dims: Vec<usize> = positions.iter().map(|&p| self.regs[p].dim).collect();
        let total: usize = dims.iter().product();
        let mut out = Vec::with_capacity(total);
        for mut a in 0..total {
            let mut off = 0;
            for i in (0..positions.len()).rev() {
                off += (a % dims[i]) * strides[positions[i]];
                a /= dims[i];
            }
            out.push(off);
        }
        out
    }

    /// Complement of `positions` in 0..len().
    pub fn complement(&self, positions: &[usize]) -> Vec<usize> {
        (0..self.regs.len()).filter(|p| !positions.contains(p)).collect()
    }

    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        let mut digits = vec![0usize; self.regs.len()];
        for i in (0..self.regs.len()).rev() {
            digits[i] = index % self.regs[i].dim;
            index /= self.regs[i].dim;
        }
        digits
    }

    pub fn encode(&self, digits: &[usize]) -> usize {
        let strides = self.strides();
        digits.iter().zip(&strides).map(|(d, s)| d * s).sum()
    }

    /// Same registers under a renaming map applied positionally.
    pub fn renamed(&self, map: &dyn Fn(&str) -> String) -> Result<RegisterSystem> {
        let regs = self
            .regs
            .iter()
            .map(|r| Register::new(map(&r.name), r.dim))
            .collect();
        RegisterSystem::with_cap(regs, usize::MAX)
    }
}
