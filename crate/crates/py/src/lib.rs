//! Python bindings over the BLS12-381 backend.
//!
//! Every artifact type has `to_bytes()` and `from_bytes()` using the same
//! envelope format as the command-line tool, so files are interchangeable.

use std::collections::BTreeSet;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyBytes;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use maabe::access_tree::parse_attribute_set;
use maabe::authority::authority_setup;
use maabe::central_authority::{ca_issue, trace as trace_key, ChallengeOrigin};
use maabe::formats::{load, save};
use maabe::harness::game::{PlantedKeyAdversary, ShareMixingAdversary, UniformGuesser, ViolatingAdversary};
use maabe::harness::{bench as run_bench, win_rate, BenchParams, GameConfig, Phase};
use maabe::scheme::{decrypt_hybrid, encrypt_hybrid, finalize_key, global_setup, request_key};
use maabe::{AccessNode, Bls12, Error, Identity};

type B = Bls12;

create_exception!(pymaabe, MaabeError, PyException);
create_exception!(pymaabe, PolicyNotSatisfied, MaabeError);
create_exception!(pymaabe, ProofRejected, MaabeError);
create_exception!(pymaabe, UntraceableKey, MaabeError);
create_exception!(pymaabe, IntegrityError, MaabeError);

fn py_err(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::PolicyNotSatisfied => PolicyNotSatisfied::new_err(msg),
        Error::ProofRejected => ProofRejected::new_err(msg),
        Error::UntraceableKey => UntraceableKey::new_err(msg),
        Error::Corruption
        | Error::Version(_)
        | Error::BackendMismatch { .. }
        | Error::Validation(_)
        | Error::TableIntegrity(_)
        | Error::Tampering => IntegrityError::new_err(msg),
        _ => MaabeError::new_err(msg),
    }
}

fn rng(seed: Option<u64>) -> ChaCha20Rng {
    match seed {
        Some(s) => ChaCha20Rng::seed_from_u64(s),
        None => ChaCha20Rng::from_entropy(),
    }
}

macro_rules! artifact {
    ($py:ident, $inner:ty, $pyname:literal) => {
        artifact!($py, $inner, $pyname {});
    };
    ($py:ident, $inner:ty, $pyname:literal { $($extra:tt)* }) => {
        #[pyclass(name = $pyname, module = "pymaabe", from_py_object)]
        #[derive(Clone)]
        pub struct $py(pub $inner);

        #[pymethods]
        impl $py {
            fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
                PyBytes::new(py, &save(&self.0))
            }

            #[staticmethod]
            fn from_bytes(data: &[u8]) -> PyResult<Self> {
                load(data).map($py).map_err(py_err)
            }

            $($extra)*
        }
    };
}

artifact!(PublicParams, maabe::PublicParams<B>, "PublicParams" {
    #[getter]
    fn authority_count(&self) -> u32 {
        self.0.authority_count
    }
});
artifact!(CaSecret, maabe::CaSecret<B>, "CaSecret" {
    /// Records an authority's PRF seed so the CA can compute its aggregate term.
    fn enroll(&mut self, authority: &AuthoritySecret) {
        self.0.enroll_authority(authority.0.index, authority.0.seed().clone());
    }
});
artifact!(TraceTable, maabe::TraceTable<B>, "TraceTable" {
    #[new]
    fn new() -> Self {
        TraceTable(maabe::TraceTable::new())
    }

    fn register(&mut self, ca: &CaSecret, identity: &str) -> PyResult<()> {
        self.0.register(&ca.0, &Identity::new(identity)).map(|_| ()).map_err(py_err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn identities(&self) -> Vec<String> {
        self.0.rows().iter().map(|r| r.id.to_string()).collect()
    }
});
artifact!(AuthoritySecret, maabe::AuthoritySecret<B>, "AuthoritySecret" {
    #[getter]
    fn index(&self) -> u32 {
        self.0.index
    }

    fn public(&self) -> AuthorityPublic {
        AuthorityPublic(self.0.public())
    }

    /// Attribute keys for `identity` over a policy such as
    /// `"(2of3 (leaf 1:1) (leaf 1:2) (leaf 1:3))"`.
    #[pyo3(signature = (mpk, identity, policy, seed = None))]
    fn grant(&self, mpk: &PublicParams, identity: &str, policy: &str, seed: Option<u64>) -> PyResult<AttributeKeyShare> {
        let tree: AccessNode = policy.parse().map_err(py_err)?;
        self.0
            .issue_attribute_keys(&mpk.0, &Identity::new(identity), &tree, &mut rng(seed))
            .map(AttributeKeyShare)
            .map_err(py_err)
    }
});
artifact!(AuthorityPublic, maabe::AuthorityPublic<B>, "AuthorityPublic");
artifact!(KeyRequest, maabe::KeyRequest<B>, "KeyRequest");
artifact!(IssuanceRequest, maabe::IssuanceRequest<B>, "IssuanceRequest" {
    #[getter]
    fn identity(&self) -> String {
        self.0.id.to_string()
    }
});
artifact!(AttributeKeyShare, maabe::AttributeKeyShare<B>, "AttributeKeyShare");
artifact!(PartialKey, maabe::PartialKey<B>, "PartialKey");
artifact!(UserKey, maabe::UserKey<B>, "UserKey" {
    #[getter]
    fn identity(&self) -> String {
        self.0.id.to_string()
    }

    #[pyo3(signature = (mpk, seed = None))]
    fn rerandomize(&self, mpk: &PublicParams, seed: Option<u64>) -> UserKey {
        UserKey(self.0.rerandomize(&mpk.0, &mut rng(seed)))
    }
});
artifact!(Ciphertext, maabe::HybridCiphertext<B>, "Ciphertext");

/// Public parameters and the CA secret for `authorities` authorities.
#[pyfunction]
#[pyo3(signature = (authorities, seed = None))]
fn setup(authorities: u32, seed: Option<u64>) -> PyResult<(PublicParams, CaSecret)> {
    let mut r = rng(seed);
    let (mpk, msk) = global_setup::<B, _>(authorities, &mut r).map_err(py_err)?;
    Ok((PublicParams(mpk), CaSecret(maabe::CaSecret::new(msk, &mut r))))
}

#[pyfunction(name = "authority_setup")]
#[pyo3(signature = (index, attributes, seed = None))]
fn py_authority_setup(index: u32, attributes: u32, seed: Option<u64>) -> PyResult<AuthoritySecret> {
    authority_setup::<B, _>(index, attributes, &mut rng(seed))
        .map(|(s, _)| AuthoritySecret(s))
        .map_err(py_err)
}

/// Private request state and the message for the CA.
#[pyfunction(name = "request_key")]
#[pyo3(signature = (mpk, identity, seed = None))]
fn py_request_key(mpk: &PublicParams, identity: &str, seed: Option<u64>) -> (KeyRequest, IssuanceRequest) {
    let (state, message) = request_key(&mpk.0, &Identity::new(identity), &mut rng(seed));
    (KeyRequest(state), IssuanceRequest(message))
}

/// Verifies the request, registers the identity and returns the partial key.
#[pyfunction]
#[pyo3(signature = (ca, mpk, table, request, shares, seed = None))]
fn issue(
    ca: &CaSecret,
    mpk: &PublicParams,
    table: &mut TraceTable,
    request: &IssuanceRequest,
    shares: Vec<AttributeKeyShare>,
    seed: Option<u64>,
) -> PyResult<PartialKey> {
    let mut scratch = table.0.clone();
    let partial = ca_issue(
        &ca.0,
        &mpk.0,
        &mut scratch,
        &request.0.id,
        &request.0.commitment,
        &request.0.proof,
        ChallengeOrigin::Derived,
        shares.into_iter().map(|s| s.0).collect(),
        &mut rng(seed),
    )
    .map_err(py_err)?;
    table.0 = scratch;
    Ok(PartialKey(partial))
}

#[pyfunction(name = "finalize_key")]
fn py_finalize_key(mpk: &PublicParams, state: &KeyRequest, partial: &PartialKey, identity: &str) -> PyResult<UserKey> {
    finalize_key(&mpk.0, &state.0, partial.0.clone(), &Identity::new(identity))
        .map(UserKey)
        .map_err(py_err)
}

/// Encrypts bytes under an attribute set such as `"1:1,2:3"`.
#[pyfunction]
#[pyo3(signature = (mpk, authorities, attributes, plaintext, seed = None))]
fn encrypt(
    mpk: &PublicParams,
    authorities: Vec<AuthorityPublic>,
    attributes: &str,
    plaintext: &[u8],
    seed: Option<u64>,
) -> PyResult<Ciphertext> {
    let attrs: BTreeSet<_> = parse_attribute_set(attributes).map_err(py_err)?;
    let publics: Vec<_> = authorities.into_iter().map(|a| a.0).collect();
    encrypt_hybrid(&mpk.0, &publics, &attrs, plaintext, &mut rng(seed))
        .map(Ciphertext)
        .map_err(py_err)
}

#[pyfunction]
fn decrypt<'py>(py: Python<'py>, mpk: &PublicParams, key: &UserKey, ciphertext: &Ciphertext) -> PyResult<Bound<'py, PyBytes>> {
    let plain = decrypt_hybrid(&mpk.0, &key.0, &ciphertext.0).map_err(py_err)?;
    Ok(PyBytes::new(py, &plain))
}

/// Identity that a well-formed key belongs to.
#[pyfunction]
fn trace(mpk: &PublicParams, table: &TraceTable, key: &UserKey) -> PyResult<String> {
    trace_key(&mpk.0, &table.0, &key.0).map(|id| id.to_string()).map_err(py_err)
}

/// Operation-count report as text.
#[pyfunction(name = "bench")]
#[pyo3(signature = (authorities, k1, k2, seed = 1))]
fn py_bench(authorities: u32, k1: u32, k2: u32, seed: u64) -> PyResult<String> {
    let mut p = BenchParams::new(authorities, k1, k2);
    p.seed = seed;
    run_bench::<B>(&p).map(|r| r.to_text()).map_err(py_err)
}

/// `(wins, aborts, runs)` for a built-in adversary on the toy backend.
#[pyfunction]
#[pyo3(signature = (adversary, runs, seed = 1))]
fn game(adversary: &str, runs: u64, seed: u64) -> PyResult<(u64, u64, u64)> {
    type T = maabe::ToyM61;
    let config = GameConfig::default();
    let stats = match adversary {
        "uniform" => win_rate::<T, _>(|| UniformGuesser, &config, runs, seed),
        "violating" => win_rate::<T, _>(|| ViolatingAdversary::new(Phase::One), &config, runs, seed),
        "planted" => {
            let c = GameConfig { plant_key: true, ..config };
            win_rate::<T, _>(PlantedKeyAdversary::default, &c, runs, seed)
        }
        "mixing" => win_rate::<T, _>(ShareMixingAdversary::default, &config, runs, seed),
        other => return Err(MaabeError::new_err(format!("unknown adversary `{other}`"))),
    };
    Ok((stats.wins, stats.aborts, stats.runs))
}

#[pymodule]
fn pymaabe(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("MaabeError", py.get_type::<MaabeError>())?;
    m.add("PolicyNotSatisfied", py.get_type::<PolicyNotSatisfied>())?;
    m.add("ProofRejected", py.get_type::<ProofRejected>())?;
    m.add("UntraceableKey", py.get_type::<UntraceableKey>())?;
    m.add("IntegrityError", py.get_type::<IntegrityError>())?;
    m.add_class::<PublicParams>()?;
    m.add_class::<CaSecret>()?;
    m.add_class::<TraceTable>()?;
    m.add_class::<AuthoritySecret>()?;
    m.add_class::<AuthorityPublic>()?;
    m.add_class::<KeyRequest>()?;
    m.add_class::<IssuanceRequest>()?;
    m.add_class::<AttributeKeyShare>()?;
    m.add_class::<PartialKey>()?;
    m.add_class::<UserKey>()?;
    m.add_class::<Ciphertext>()?;
    m.add_function(wrap_pyfunction!(setup, m)?)?;
    m.add_function(wrap_pyfunction!(py_authority_setup, m)?)?;
    m.add_function(wrap_pyfunction!(py_request_key, m)?)?;
    m.add_function(wrap_pyfunction!(issue, m)?)?;
    m.add_function(wrap_pyfunction!(py_finalize_key, m)?)?;
    m.add_function(wrap_pyfunction!(encrypt, m)?)?;
    m.add_function(wrap_pyfunction!(decrypt, m)?)?;
    m.add_function(wrap_pyfunction!(trace, m)?)?;
    m.add_function(wrap_pyfunction!(py_bench, m)?)?;
    m.add_function(wrap_pyfunction!(game, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
