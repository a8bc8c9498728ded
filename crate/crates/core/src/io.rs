//! JSON file formats: operators, problems and witnesses.
//!
//! Numbers are written with the shortest representation that parses back
//! to the same `f64`, so serialize-then-parse is bit stable.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::algebra::{Algebra, Operator};
use crate::cp_map::CpMap;
use crate::error::{Error, Result};
use crate::extremality::ExtremalityReport;
use crate::gchannel::{diag_subspace, CombInstance, GchanInstance, Povm, Tester};
use crate::linalg::{CMat, Tolerance, C64};
use crate::subspace::{comb_subspace, Subspace};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Choi,
    Effect,
    State,
    SubspaceBasisElement,
    Witness,
}

/// An algebra: a leaf given by its block sizes, or a tensor product of leaves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlgebraSpec {
    Leaf(Vec<usize>),
    Tensor { tensor: Vec<Vec<usize>> },
}

impl AlgebraSpec {
    pub fn of(alg: &Algebra) -> Self {
        if alg.is_leaf() {
            AlgebraSpec::Leaf(alg.block_dims())
        } else {
            AlgebraSpec::Tensor {
                tensor: alg.factors().iter().map(|f| f.block_dims()).collect(),
            }
        }
    }

    pub fn build(&self) -> Result<Algebra> {
        match self {
            AlgebraSpec::Leaf(d) => Algebra::new(d),
            AlgebraSpec::Tensor { tensor } => {
                let leaves = tensor.iter().map(|d| Algebra::new(d)).collect::<Result<Vec<_>>>()?;
                Algebra::tensor_all(&leaves.iter().collect::<Vec<_>>())
            }
        }
    }
}

/// One operator: block sizes, optional tensor factors, and each block as a
/// row-major list of `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorFile {
    pub schema_version: u32,
    pub algebra: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<Vec<usize>>>,
    pub blocks: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<Role>,
}

impl OperatorFile {
    pub fn from_operator(op: &Operator, role: Option<Role>) -> Self {
        let alg = op.algebra();
        let blocks = op
            .blocks()
            .iter()
            .map(|b| {
                let mut out = Vec::with_capacity(b.len());
                for r in 0..b.nrows() {
                    for c in 0..b.ncols() {
                        out.push([b[(r, c)].re, b[(r, c)].im]);
                    }
                }
                out
            })
            .collect();
        Self {
            schema_version: SCHEMA_VERSION,
            algebra: alg.block_dims(),
            factors: (!alg.is_leaf()).then(|| alg.factors().iter().map(|f| f.block_dims()).collect()),
            blocks,
            role,
        }
    }

    pub fn algebra(&self) -> Result<Algebra> {
        let alg = match &self.factors {
            None => Algebra::new(&self.algebra)?,
            Some(f) => AlgebraSpec::Tensor { tensor: f.clone() }.build()?,
        };
        if alg.block_dims() != self.algebra {
            return Err(Error::Parse(format!(
                "factors give blocks {:?}, file declares {:?}",
                alg.block_dims(),
                self.algebra
            )));
        }
        Ok(alg)
    }

    pub fn to_operator(&self) -> Result<Operator> {
        check_schema(self.schema_version)?;
        let alg = self.algebra()?;
        if self.blocks.len() != alg.num_blocks() {
            return Err(Error::Parse(format!(
                "{} blocks given for an algebra with {}",
                self.blocks.len(),
                alg.num_blocks()
            )));
        }
        let mats = self
            .blocks
            .iter()
            .zip(alg.block_dims())
            .map(|(b, n)| {
                if b.len() != n * n {
                    return Err(Error::Parse(format!("block of size {n} needs {} entries, got {}", n * n, b.len())));
                }
                if b.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(Error::Parse("non-finite matrix entry".into()));
                }
                Ok(CMat::from_row_iterator(n, n, b.iter().map(|[re, im]| C64::new(*re, *im))))
            })
            .collect::<Result<Vec<_>>>()?;
        Operator::from_blocks(&alg, &mats)
    }

    /// Checks the operator lives on `expected`.
    pub fn to_operator_on(&self, expected: &Algebra) -> Result<Operator> {
        let op = self.to_operator()?;
        if op.algebra() != expected {
            return Err(Error::Parse(format!("operator on {}, expected {}", op.algebra(), expected)));
        }
        Operator::new(expected, op.into_matrix())
    }
}

fn check_schema(v: u32) -> Result<()> {
    if v != SCHEMA_VERSION {
        return Err(Error::Parse(format!("unsupported schema_version {v}")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Gchannel,
    Gpovm,
    Comb,
    Tester,
}

/// How the constraint subspace `J` is obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SubspaceSpec {
    /// `J = A`.
    Full,
    /// `J_n` for `[B_0, …, B_n]`; the input algebra must be `B_n ⊗ … ⊗ B_0`.
    Comb { algebras: Vec<Vec<usize>> },
    /// `J_λ` on `M_n`, `n = len(λ)`.
    Diag { lambda: Vec<f64> },
    /// The span of explicit elements.
    Basis { elements: Vec<OperatorFile> },
    /// `S^{-1}(J_0)` for a channel `S` given by its Choi matrix on `A_0 ⊗ A`.
    Preimage {
        channel: OperatorFile,
        target: AlgebraSpec,
        j0: Box<SubspaceSpec>,
    },
}

impl SubspaceSpec {
    pub fn resolve(&self, alg: &Algebra, tol: &Tolerance) -> Result<Subspace> {
        let recast = |s: Subspace| -> Result<Subspace> {
            let gens = s
                .basis()
                .iter()
                .map(|b| Operator::new(alg, b.matrix().clone()))
                .collect::<Result<Vec<_>>>()?;
            Subspace::span_closure(alg, &gens, tol)
        };
        match self {
            SubspaceSpec::Full => Ok(Subspace::whole(alg)),
            SubspaceSpec::Comb { algebras } => {
                let algs = algebras.iter().map(|d| Algebra::new(d)).collect::<Result<Vec<_>>>()?;
                let j = comb_subspace(&algs, tol)?;
                if j.algebra() != alg {
                    return Err(Error::Parse(format!("comb subspace lives on {}, input is {}", j.algebra(), alg)));
                }
                recast(j)
            }
            SubspaceSpec::Diag { lambda } => {
                let (j, _, _) = diag_subspace(lambda, tol)?;
                if j.algebra() != alg {
                    return Err(Error::Parse(format!("diag subspace lives on {}, input is {}", j.algebra(), alg)));
                }
                recast(j)
            }
            SubspaceSpec::Basis { elements } => {
                let gens = elements
                    .iter()
                    .map(|e| e.to_operator_on(alg))
                    .collect::<Result<Vec<_>>>()?;
                Subspace::span_closure(alg, &gens, tol)
            }
            SubspaceSpec::Preimage { channel, target, j0 } => {
                let target = target.build()?;
                let x = channel.to_operator_on(&target.tensor(alg))?;
                let s = CpMap::from_choi(&x, alg, &target, tol)?;
                let j0 = j0.resolve(&target, tol)?;
                Subspace::preimage_under_channel(&s, &j0, tol)
            }
        }
    }
}

/// Provenance of a generated problem: algorithm name, seed and kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorHeader {
    pub name: String,
    pub seed: u64,
    pub kind: String,
}

/// A membership / extremality problem.
///
/// `algebras` depends on `kind`:
/// `gchannel` takes `[input, output]`, `gpovm` takes `[input]`,
/// `comb` takes `[B_0, …, B_n]` and `tester` takes `[H_0, H_1]`.
/// `operators` holds the Choi matrix (`gchannel`), the effects (`gpovm`,
/// `tester`) or the comb element (`comb`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorHeader>,
    pub kind: ProblemKind,
    pub algebras: Vec<AlgebraSpec>,
    pub operators: Vec<OperatorFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subspace: Option<SubspaceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

/// A problem with every operator and subspace resolved.
#[derive(Clone, Debug)]
pub enum Problem {
    Gchannel(GchanInstance),
    Gpovm(Povm),
    Comb(CombInstance),
    Tester(Tester),
}

impl ProblemFile {
    pub fn gchannel(gi: &GchanInstance, subspace: SubspaceSpec) -> Self {
        let map = gi.map();
        Self {
            schema_version: SCHEMA_VERSION,
            generator: None,
            kind: ProblemKind::Gchannel,
            algebras: vec![AlgebraSpec::of(map.input()), AlgebraSpec::of(map.output())],
            operators: vec![OperatorFile::from_operator(map.choi(), Some(Role::Choi))],
            subspace: Some(subspace),
            tol: None,
        }
    }

    pub fn gpovm(p: &Povm, subspace: SubspaceSpec) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            generator: None,
            kind: ProblemKind::Gpovm,
            algebras: vec![AlgebraSpec::of(p.algebra())],
            operators: effect_files(p.effects()),
            subspace: Some(subspace),
            tol: None,
        }
    }

    pub fn comb(c: &CombInstance) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            generator: None,
            kind: ProblemKind::Comb,
            algebras: c.algebras().iter().map(AlgebraSpec::of).collect(),
            operators: vec![OperatorFile::from_operator(c.operator(), Some(Role::Choi))],
            subspace: None,
            tol: None,
        }
    }

    pub fn tester(t: &Tester) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            generator: None,
            kind: ProblemKind::Tester,
            algebras: vec![AlgebraSpec::of(t.h0()), AlgebraSpec::of(t.h1())],
            operators: effect_files(t.effects()),
            subspace: None,
            tol: None,
        }
    }

    pub fn with_generator(mut self, seed: u64, kind: &str) -> Self {
        self.generator = Some(GeneratorHeader {
            name: crate::sample::GENERATOR.into(),
            seed,
            kind: kind.into(),
        });
        self
    }

    fn algebra_count(&self, n: usize) -> Result<Vec<Algebra>> {
        if self.algebras.len() != n {
            return Err(Error::Parse(format!(
                "{:?} problems list {n} algebras, got {}",
                self.kind,
                self.algebras.len()
            )));
        }
        self.algebras.iter().map(AlgebraSpec::build).collect()
    }

    /// Builds the problem at `tol` (the file's own `tol` is applied by the caller).
    pub fn resolve(&self, tol: &Tolerance) -> Result<Problem> {
        check_schema(self.schema_version)?;
        if self.operators.is_empty() {
            return Err(Error::Parse("no operators given".into()));
        }
        let spec = self.subspace.clone().unwrap_or(SubspaceSpec::Full);
        match self.kind {
            ProblemKind::Gchannel => {
                let algs = self.algebra_count(2)?;
                let (input, output) = (&algs[0], &algs[1]);
                let x = self.operators[0].to_operator_on(&output.tensor(input))?;
                let map = CpMap::from_choi(&x, input, output, tol)?;
                let j = spec.resolve(input, tol)?;
                Ok(Problem::Gchannel(GchanInstance::new(map, j)?))
            }
            ProblemKind::Gpovm => {
                let algs = self.algebra_count(1)?;
                let effects = self
                    .operators
                    .iter()
                    .map(|o| o.to_operator_on(&algs[0]))
                    .collect::<Result<Vec<_>>>()?;
                let j = spec.resolve(&algs[0], tol)?;
                Ok(Problem::Gpovm(Povm::new(effects, j)?))
            }
            ProblemKind::Comb => {
                if self.algebras.len() < 2 {
                    return Err(Error::Parse("a comb needs at least two algebras".into()));
                }
                let algs: Vec<Algebra> = self.algebras.iter().map(AlgebraSpec::build).collect::<Result<_>>()?;
                let an = crate::subspace::comb_algebra(&algs, algs.len() - 1)?;
                let x = self.operators[0].to_operator_on(&an)?;
                Ok(Problem::Comb(CombInstance::new(algs, x)?))
            }
            ProblemKind::Tester => {
                let algs = self.algebra_count(2)?;
                let (h0, h1) = (&algs[0], &algs[1]);
                let alg = h1.tensor(h0);
                let effects = self
                    .operators
                    .iter()
                    .map(|o| o.to_operator_on(&alg))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Problem::Tester(Tester::new(h1, h0, effects)?))
            }
        }
    }
}

fn effect_files(effects: &[Operator]) -> Vec<OperatorFile> {
    effects
        .iter()
        .map(|e| OperatorFile::from_operator(e, Some(Role::Effect)))
        .collect()
}

/// The certificate written next to a problem when it is not extremal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessFile {
    pub schema_version: u32,
    pub verdict: String,
    pub method: String,
    /// Direction `D` on `B ⊗ A`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<OperatorFile>,
    /// Directions `D_u` on the effects, for measurement problems.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effects: Option<Vec<OperatorFile>>,
}

impl WitnessFile {
    pub fn from_report(rep: &ExtremalityReport) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            verdict: rep.verdict.to_string(),
            method: rep.method.to_string(),
            witness: rep.witness.as_ref().map(|w| OperatorFile::from_operator(w, Some(Role::Witness))),
            effects: rep.effect_witness.as_ref().map(|ds| {
                ds.iter()
                    .map(|d| OperatorFile::from_operator(d, Some(Role::Witness)))
                    .collect()
            }),
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes")
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    from_json(&text)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = to_json(value);
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
