//! Groth16 (BN254) over a serialized rank-1 constraint system.
//!
//! Constraint layout: variable 0 is the constant one, variables
//! `1..=num_public` are public inputs, the rest are private. Each constraint
//! row is three sparse linear combinations, each encoded as a `u32` term
//! count followed by `(u32 variable, 32-byte little-endian coefficient)`.

use ark_bn254::{Bn254, Fr};
use ark_ff::PrimeField;
use ark_groth16::{Groth16, PreparedVerifyingKey, Proof, ProvingKey, VerifyingKey};
use ark_relations::lc;
use ark_relations::r1cs::{
    ConstraintSynthesizer, ConstraintSystemRef, LinearCombination, SynthesisError, Variable,
};
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize};
use ark_snark::SNARK;
use ark_std::rand::SeedableRng;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyBytes;
use rand_chacha::ChaCha20Rng;
use std::sync::Arc;

type Row = [Vec<(u32, Fr)>; 3];

fn err<E: std::fmt::Debug>(e: E) -> PyErr {
    PyValueError::new_err(format!("{e:?}"))
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn u32(&mut self) -> PyResult<u32> {
        let b = self
            .buf
            .get(self.pos..self.pos + 4)
            .ok_or_else(|| PyValueError::new_err("truncated constraint data"))?;
        self.pos += 4;
        Ok(u32::from_le_bytes(b.try_into().unwrap()))
    }

    fn fe(&mut self) -> PyResult<Fr> {
        let b = self
            .buf
            .get(self.pos..self.pos + 32)
            .ok_or_else(|| PyValueError::new_err("truncated field element"))?;
        self.pos += 32;
        Ok(Fr::from_le_bytes_mod_order(b))
    }
}

fn read_fes(data: &[u8]) -> PyResult<Vec<Fr>> {
    if data.len() % 32 != 0 {
        return Err(PyValueError::new_err("field vector length must be a multiple of 32"));
    }
    Ok(data.chunks(32).map(Fr::from_le_bytes_mod_order).collect())
}

/// A parsed constraint system, shared between setup and proving.
#[pyclass(frozen)]
struct Circuit {
    num_public: usize,
    num_vars: usize,
    rows: Arc<Vec<Row>>,
}

#[pymethods]
impl Circuit {
    #[new]
    fn new(num_public: usize, num_vars: usize, data: &[u8]) -> PyResult<Self> {
        let mut r = Reader { buf: data, pos: 0 };
        let mut rows = Vec::new();
        while r.pos < data.len() {
            let mut row: Row = Default::default();
            for side in row.iter_mut() {
                let n = r.u32()?;
                for _ in 0..n {
                    let v = r.u32()?;
                    if v as usize >= num_vars {
                        return Err(PyValueError::new_err("variable out of range"));
                    }
                    side.push((v, r.fe()?));
                }
            }
            rows.push(row);
        }
        Ok(Circuit { num_public, num_vars, rows: Arc::new(rows) })
    }

    fn __len__(&self) -> usize {
        self.rows.len()
    }
}

struct Synth {
    num_public: usize,
    num_vars: usize,
    rows: Arc<Vec<Row>>,
    values: Option<Vec<Fr>>,
}

impl ConstraintSynthesizer<Fr> for Synth {
    fn generate_constraints(self, cs: ConstraintSystemRef<Fr>) -> Result<(), SynthesisError> {
        let mut vars = Vec::with_capacity(self.num_vars);
        vars.push(Variable::One);
        let value = |i: usize| -> Result<Fr, SynthesisError> {
            self.values
                .as_ref()
                .map(|v| v[i])
                .ok_or(SynthesisError::AssignmentMissing)
        };
        for i in 1..self.num_vars {
            let var = if i <= self.num_public {
                cs.new_input_variable(|| value(i))?
            } else {
                cs.new_witness_variable(|| value(i))?
            };
            vars.push(var);
        }
        for row in self.rows.iter() {
            let mut sides: Vec<LinearCombination<Fr>> = Vec::with_capacity(3);
            for side in row.iter() {
                let mut l = lc!();
                for (v, c) in side {
                    l = l + (*c, vars[*v as usize]);
                }
                sides.push(l);
            }
            let c = sides.pop().unwrap();
            let b = sides.pop().unwrap();
            let a = sides.pop().unwrap();
            cs.enforce_constraint(a, b, c)?;
        }
        Ok(())
    }
}

fn seeded(seed: &[u8]) -> ChaCha20Rng {
    let mut s = [0u8; 32];
    for (i, b) in seed.iter().enumerate() {
        s[i % 32] ^= *b;
    }
    ChaCha20Rng::from_seed(s)
}

fn to_bytes<T: CanonicalSerialize>(py: Python<'_>, x: &T) -> PyResult<Py<PyBytes>> {
    let mut out = Vec::new();
    x.serialize_compressed(&mut out).map_err(err)?;
    Ok(PyBytes::new_bound(py, &out).unbind())
}

#[pyclass(frozen)]
struct ProverKey(ProvingKey<Bn254>);

#[pymethods]
impl ProverKey {
    fn to_bytes(&self, py: Python<'_>) -> PyResult<Py<PyBytes>> {
        to_bytes(py, &self.0)
    }

    #[staticmethod]
    fn from_bytes(data: &[u8]) -> PyResult<Self> {
        Ok(ProverKey(
            ProvingKey::deserialize_compressed_unchecked(data).map_err(err)?,
        ))
    }
}

#[pyclass(frozen)]
struct VerifierKey {
    vk: VerifyingKey<Bn254>,
    pvk: PreparedVerifyingKey<Bn254>,
}

#[pymethods]
impl VerifierKey {
    fn to_bytes(&self, py: Python<'_>) -> PyResult<Py<PyBytes>> {
        to_bytes(py, &self.vk)
    }

    #[staticmethod]
    fn from_bytes(data: &[u8]) -> PyResult<Self> {
        let vk = VerifyingKey::<Bn254>::deserialize_compressed(data).map_err(err)?;
        let pvk = ark_groth16::prepare_verifying_key(&vk);
        Ok(VerifierKey { vk, pvk })
    }

    fn num_public(&self) -> usize {
        self.vk.gamma_abc_g1.len() - 1
    }
}

/// Deterministic key generation: the same circuit and seed give the same keys.
#[pyfunction]
fn setup(py: Python<'_>, circuit: &Circuit, seed: &[u8]) -> PyResult<(ProverKey, VerifierKey)> {
    let synth = Synth {
        num_public: circuit.num_public,
        num_vars: circuit.num_vars,
        rows: circuit.rows.clone(),
        values: None,
    };
    let mut rng = seeded(seed);
    let (pk, vk) = py
        .allow_threads(|| Groth16::<Bn254>::circuit_specific_setup(synth, &mut rng))
        .map_err(err)?;
    let pvk = ark_groth16::prepare_verifying_key(&vk);
    Ok((ProverKey(pk), VerifierKey { vk, pvk }))
}

/// Prove with fresh randomness drawn from `entropy`.
#[pyfunction]
fn prove(
    py: Python<'_>,
    pk: &ProverKey,
    circuit: &Circuit,
    assignment: &[u8],
    entropy: &[u8],
) -> PyResult<Py<PyBytes>> {
    let values = read_fes(assignment)?;
    if values.len() != circuit.num_vars {
        return Err(PyValueError::new_err("assignment length does not match the circuit"));
    }
    let synth = Synth {
        num_public: circuit.num_public,
        num_vars: circuit.num_vars,
        rows: circuit.rows.clone(),
        values: Some(values),
    };
    let mut rng = seeded(entropy);
    let proof = py
        .allow_threads(|| Groth16::<Bn254>::prove(&pk.0, synth, &mut rng))
        .map_err(err)?;
    to_bytes(py, &proof)
}

/// Returns False for malformed proofs instead of raising.
#[pyfunction]
fn verify(py: Python<'_>, vk: &VerifierKey, public: &[u8], proof: &[u8]) -> PyResult<bool> {
    let inputs = read_fes(public)?;
    if inputs.len() != vk.num_public() {
        return Ok(false);
    }
    let proof = match Proof::<Bn254>::deserialize_compressed(proof) {
        Ok(p) => p,
        Err(_) => return Ok(false),
    };
    Ok(py
        .allow_threads(|| Groth16::<Bn254>::verify_with_processed_vk(&vk.pvk, &inputs, &proof))
        .unwrap_or(false))
}

#[pymodule]
fn irac_groth16(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Circuit>()?;
    m.add_class::<ProverKey>()?;
    m.add_class::<VerifierKey>()?;
    m.add_function(wrap_pyfunction!(setup, m)?)?;
    m.add_function(wrap_pyfunction!(prove, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
