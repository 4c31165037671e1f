//! Stoichiometric subspace, conservation laws and boundary face dimensions.

use num_traits::Zero;
use thiserror::Error;

use crate::linalg::{self, primitive, Rational, RationalMatrix};
use crate::network::{ReactionNetwork, SpeciesSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StoichError {
    #[error("species index {0} is not in the network")]
    UnknownSpecies(usize),
}

/// `n x r` integer matrix; column `i` is the net change of reaction `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoichMatrix {
    n: usize,
    columns: Vec<Vec<i64>>,
}

impl StoichMatrix {
    pub fn from_columns(n: usize, columns: Vec<Vec<i64>>) -> Self {
        assert!(columns.iter().all(|c| c.len() == n));
        Self { n, columns }
    }

    pub fn n_species(&self) -> usize {
        self.n
    }

    pub fn n_reactions(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, i: usize) -> &[i64] {
        &self.columns[i]
    }

    pub fn columns(&self) -> &[Vec<i64>] {
        &self.columns
    }

    pub fn to_rational(&self) -> RationalMatrix {
        let rows: Vec<Vec<i64>> = (0..self.n)
            .map(|j| self.columns.iter().map(|c| c[j]).collect())
            .collect();
        if self.columns.is_empty() {
            return RationalMatrix::zeros(self.n, 0);
        }
        RationalMatrix::from_i64_rows(&rows)
    }
}

/// Linearly independent rational vectors spanning a subspace of `Q^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubspaceBasis {
    pub ambient: usize,
    pub vectors: Vec<Vec<Rational>>,
}

impl SubspaceBasis {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn as_strings(&self) -> Vec<Vec<String>> {
        self.vectors
            .iter()
            .map(|v| v.iter().map(linalg::rat_string).collect())
            .collect()
    }

    pub fn as_f64(&self) -> Vec<Vec<f64>> {
        self.vectors
            .iter()
            .map(|v| v.iter().map(linalg::to_f64).collect())
            .collect()
    }
}

pub fn stoich_matrix(net: &ReactionNetwork) -> StoichMatrix {
    let n = net.n_species();
    StoichMatrix::from_columns(n, net.reactions().iter().map(|r| r.vector(n)).collect())
}

/// Stoichiometric columns of a subset of reactions.
pub fn block_matrix(net: &ReactionNetwork, reactions: &[usize]) -> StoichMatrix {
    let n = net.n_species();
    StoichMatrix::from_columns(
        n,
        reactions.iter().map(|&i| net.reactions()[i].vector(n)).collect(),
    )
}

/// Column-space basis, chosen among the original reaction vectors.
pub fn subspace_basis(m: &StoichMatrix) -> SubspaceBasis {
    let rm = m.to_rational();
    let vectors = rm
        .independent_columns()
        .into_iter()
        .map(|j| rm.column(j))
        .collect();
    SubspaceBasis {
        ambient: m.n_species(),
        vectors,
    }
}

/// Basis of the orthogonal complement (left null space), primitive integer vectors.
pub fn conservation_basis(m: &StoichMatrix) -> SubspaceBasis {
    let vectors = m
        .to_rational()
        .transpose()
        .null_space()
        .iter()
        .map(|v| primitive(v))
        .collect();
    SubspaceBasis {
        ambient: m.n_species(),
        vectors,
    }
}

fn check_set(m: &StoichMatrix, set: &SpeciesSet) -> Result<(), StoichError> {
    match set.iter().find(|&s| s >= m.n_species()) {
        Some(s) => Err(StoichError::UnknownSpecies(s)),
        None => Ok(()),
    }
}

/// Basis of `{v in S : v_j = 0 for j in W}`, computed as the image under the
/// subspace basis of the kernel of its restriction to the rows of `W`.
pub fn face_kernel_of(m: &StoichMatrix, w: &SpeciesSet) -> Result<SubspaceBasis, StoichError> {
    check_set(m, w)?;
    let basis = subspace_basis(m);
    let n = m.n_species();
    if basis.dim() == 0 {
        return Ok(SubspaceBasis {
            ambient: n,
            vectors: Vec::new(),
        });
    }
    let b = RationalMatrix::from_columns(n, &basis.vectors);
    let rows = w.to_vec();
    let coeffs = if rows.is_empty() {
        // Nothing to vanish on: the kernel is every coefficient vector.
        (0..basis.dim())
            .map(|k| {
                let mut e = vec![Rational::zero(); basis.dim()];
                e[k] = linalg::rat(1);
                e
            })
            .collect()
    } else {
        b.select_rows(&rows).null_space()
    };
    let vectors = coeffs
        .iter()
        .map(|c| {
            let v = b.mul(&RationalMatrix::from_columns(basis.dim(), std::slice::from_ref(c)));
            primitive(&v.column(0))
        })
        .collect();
    Ok(SubspaceBasis { ambient: n, vectors })
}

pub fn face_kernel(net: &ReactionNetwork, w: &SpeciesSet) -> Result<SubspaceBasis, StoichError> {
    face_kernel_of(&stoich_matrix(net), w)
}

/// `dim(S ∩ ker π_W)`: the dimension of the boundary face cut out by `W`.
pub fn face_dimension(net: &ReactionNetwork, w: &SpeciesSet) -> Result<usize, StoichError> {
    Ok(face_kernel(net, w)?.dim())
}

/// `dim π_set(S)`, the rank of the stoichiometric rows indexed by `set`.
pub fn projected_dimension_of(m: &StoichMatrix, set: &SpeciesSet) -> Result<usize, StoichError> {
    check_set(m, set)?;
    if set.is_empty() || m.n_reactions() == 0 {
        return Ok(0);
    }
    Ok(m.to_rational().select_rows(&set.to_vec()).rank())
}

pub fn projected_dimension(net: &ReactionNetwork, set: &SpeciesSet) -> Result<usize, StoichError> {
    projected_dimension_of(&stoich_matrix(net), set)
}

pub fn dimension(net: &ReactionNetwork) -> usize {
    let m = stoich_matrix(net);
    if m.n_reactions() == 0 {
        0
    } else {
        m.to_rational().rank()
    }
}

/// A nonzero, entrywise nonnegative conservation law, if one exists
/// (primitive integer scaling).
pub fn has_nonnegative_conservation(m: &StoichMatrix) -> Option<Vec<Rational>> {
    linalg::nonnegative_left_kernel_point(&m.to_rational()).map(|a| primitive(&a))
}
