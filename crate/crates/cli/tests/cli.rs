use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use tempfile::TempDir;
use trl_cli::inputs::{self, ForcingFile, ForcingMember, ForcingSpace};
use trl_core::additive::{
    ConstraintFile, ConstraintSpaceFile, LSystem, PointSet, ProductMultiset, Subspace,
};
use trl_core::poly::Polynomial;
use trl_core::rank::PrankCertificate;
use trl_core::rank::prank::CertificateFile;
use trl_core::rng::Stream;
use trl_core::{FieldSpec, Tensor};

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Run {
    fn json(&self) -> Value {
        serde_json::from_str(&self.stdout).unwrap_or_else(|e| panic!("{e}: {}", self.stdout))
    }
}

fn trl(args: &[&str]) -> Run {
    trl_env(args, &[])
}

fn trl_env(args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut c = Command::new(env!("CARGO_BIN_EXE_trl"));
    c.args(args).env_remove("TRL_GUARD_OVERRIDE");
    for (k, v) in env {
        c.env(k, v);
    }
    let out = c.output().expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn f(p: u32) -> FieldSpec {
    FieldSpec::prime(p).unwrap()
}

fn poly(fs: &FieldSpec, n: usize, terms: &[(Vec<u32>, u32)]) -> String {
    let terms: Vec<_> = terms.iter().map(|(e, c)| (e.clone(), fs.elem(*c).unwrap())).collect();
    Polynomial::from_terms(fs, n, &terms).unwrap().to_json()
}

const ID2: &str = r#"{"field":{"p":2,"deg":1,"modulus":null},"dims":[2,2],"entries":[1,0,0,1]}"#;

#[test]
fn arank_of_identity_matrix() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "id2.json", ID2);
    let r = trl(&["arank", "-i", s(&p)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let j = r.json();
    assert_eq!(j["summary"], "bias 1/4, arank 2");
    assert_eq!(j["results"]["floor"], 2);
    assert_eq!(j["command"], "arank");
}

#[test]
fn report_records_inputs_and_argv() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "id2.json", ID2);
    let j = trl(&["bias-tensor", "-i", s(&p), "--threads", "2", "--exact"]).json();
    let hex: String = Sha256::digest(ID2.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(j["inputs"][0]["sha256"], hex);
    assert_eq!(j["inputs"][0]["path"], s(&p));
    assert_eq!(j["argv"], format!("trl bias-tensor -i {} --exact", s(&p)));
    assert_eq!(j["results"]["bias"], "1/4");
    assert_eq!(j["results"]["crosscheck"]["characters"], 1);
    assert!(j.get("timings").is_none());
    let t = trl(&["bias-tensor", "-i", s(&p), "--timings"]).json();
    assert!(t["timings"]["total_ms"].is_number());
}

#[test]
fn prank_of_zero_and_inconclusive_budget() {
    let dir = TempDir::new().unwrap();
    let zero = write(&dir, "zero.txt", "field 2 1\ndims 2 2 2\nentries 0 0 0 0 0 0 0 0\n");
    let r = trl(&["prank", "-i", s(&zero)]);
    assert_eq!(r.code, 0);
    assert_eq!(r.json()["summary"], "prank bounds (0,0) exact");

    let hard = write(
        &dir,
        "hard.txt",
        "field 2 1\ndims 3 3 3\nentries 1 0 1 1 1 0 0 1 1 0 1 1 1 0 0 1 0 1 1 1 0 0 1 0 1 1 1\n",
    );
    let r = trl(&["prank", "-i", s(&hard), "--budget", "1"]);
    assert_eq!(r.code, 3);
    assert_eq!(r.json()["results"]["status"], "inconclusive");

    let cert = dir.path().join("cert.json");
    let r = trl(&["prank", "-i", s(&hard), "--artifact", s(&cert)]);
    assert_eq!(r.code, 0);
    assert_eq!(r.json()["summary"], "prank bounds (3,3) exact");
    let file: CertificateFile = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    let (t, c): (Tensor, PrankCertificate) = PrankCertificate::from_file(&file).unwrap();
    c.verify(&t).unwrap();
    assert_eq!(c.len(), 3);
}

#[test]
fn tower_bound_is_symbolic() {
    let r = trl(&["tower-bound", "--theorem", "1.11", "-d", "3", "-r", "1", "--q", "2"]);
    assert_eq!(r.code, 0);
    let j = r.json();
    assert_eq!(j["summary"], "2^2·tower_16(6^6+1, 1)");
    assert_eq!(j["results"]["refusal"], "too_large");
    assert_eq!(j["results"]["lowered"], "2^2·tower_16(6^6, 16^1)");
    let small = trl(&["tower-bound", "--theorem", "lemma3.1-f1", "-d", "1"]).json();
    assert_eq!(small["results"]["numeric"], "2417851639229258349412352");
    assert_eq!(trl(&["tower-bound", "--theorem", "9.9"]).code, 2);
}

#[test]
fn invalid_inputs_exit_2() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", "{\"field\": 3}");
    assert_eq!(trl(&["arank", "-i", s(&bad)]).code, 2);
    assert_eq!(trl(&["arank", "-i", "/nonexistent/file"]).code, 2);
    assert_eq!(trl(&["no-such-command"]).code, 2);
    let p = write(&dir, "xy.json", &poly(&f(2), 2, &[(vec![1, 1], 1)]));
    let r = trl(&["taylor", "-i", s(&p), "--order", "2"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("characteristic"), "{}", r.stderr);
}

#[test]
fn guard_violation_and_override() {
    let dir = TempDir::new().unwrap();
    // 13 + 13 inputs of the first two modes: 2^26 > 2^24
    let n = 13 * 13 * 2;
    let entries = vec!["0"; n].join(" ");
    let p = write(&dir, "big.txt", &format!("field 2 1\ndims 13 13 2\nentries {entries}\n"));
    let r = trl(&["bias-tensor", "-i", s(&p)]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("TRL_GUARD_OVERRIDE"), "{}", r.stderr);
    let j = trl_env(&["bias-tensor", "-i", s(&p)], &[("TRL_GUARD_OVERRIDE", "100000000")]);
    assert_eq!(j.code, 0, "{}", j.stderr);
    assert_eq!(j.json()["results"]["bias"], "1");
    assert_eq!(j.json()["guard"]["override"], "100000000");
}

#[test]
fn text_format_and_output_file() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "id2.json", ID2);
    let out = dir.path().join("report.txt");
    let r = trl(&["arank", "-i", s(&p), "--format", "text", "-o", s(&out)]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("command   arank\nsummary   bias 1/4, arank 2\n"), "{text}");
}

#[test]
fn polynomial_commands() {
    let dir = TempDir::new().unwrap();
    let f3 = f(3);
    let xy = write(&dir, "xy.json", &poly(&f3, 2, &[(vec![1, 1], 1)]));
    let sq = write(&dir, "sq.json", &poly(&f3, 1, &[(vec![2], 1)]));
    let x = write(&dir, "x.json", &poly(&f3, 2, &[(vec![1, 0], 1)]));

    let b = trl(&["bias-poly", "-i", s(&sq)]).json();
    assert_eq!(b["results"]["histogram"]["counts"], json!([1, 2, 0]));

    // the second derivative of xy is a rank-2 bilinear form: ‖f‖_{U^2}^4 = 1/9
    let g = trl(&["gowers", "-i", s(&xy), "--order", "2"]).json();
    assert_eq!(g["results"]["power"]["rational"], "1/9");
    assert!((g["results"]["value"].as_f64().unwrap() - 3f64.powf(-0.5)).abs() < 1e-12);
    assert_eq!(trl(&["gowers", "-i", s(&xy), "--order", "2", "--char", "0"]).code, 2);

    let out = dir.path().join("t.json");
    let d = trl(&["derive-tensor", "-i", s(&xy), "--order", "2", "--artifact", s(&out)]);
    assert_eq!(d.code, 0);
    let t = inputs::tensor(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(t.codes(), vec![0, 1, 1, 0]);

    let tay = trl(&["taylor", "-i", s(&xy), "--order", "2"]).json();
    assert_eq!(tay["results"]["remainder_degree"], 0);

    let c = trl(&["correlate", "-i", s(&xy), "--max-degree", "1"]).json();
    assert_eq!(c["results"]["candidates"], 27);
    assert!(c["results"]["prime_field"].as_bool().unwrap());

    let same = trl(&["rank-check", "-i", s(&xy), "--with", s(&xy)]).json();
    assert_eq!(same["results"]["functional"], true);
    assert_eq!(same["results"]["degree_condition"], false);
    let other = trl(&["rank-check", "-i", s(&xy), "--with", s(&x)]).json();
    assert_eq!(other["results"]["functional"], false);
}

#[test]
fn bogolyubov_on_a_subspace() {
    let dir = TempDir::new().unwrap();
    let f2 = f(2);
    // the even-weight vectors of F_2^4: a subspace of codim 1
    let codes: Vec<u32> = (0..16).filter(|c: &u32| c.count_ones() % 2 == 0).collect();
    let set = PointSet::new(&f2, 4, codes).unwrap();
    let p = write(&dir, "set.txt", &set.to_text());
    let j = trl(&["bogolyubov", "-i", s(&p)]).json();
    assert_eq!(j["results"]["delta"], "1/2");
    assert_eq!(j["results"]["codim"], 1);
    assert_eq!(j["results"]["witnesses"].as_array().unwrap().len(), 8);
    let dense = trl(&["bogolyubov", "-i", s(&p), "--delta", "3/4"]);
    assert_eq!(dense.code, 2);
}

fn lsystem_file(sys: &LSystem) -> String {
    serde_json::to_string(&sys.to_file()).unwrap()
}

#[test]
fn lsystem_commands() {
    let dir = TempDir::new().unwrap();
    let f2 = f(2);
    let dims = [3usize, 3];
    let mut rng = Stream::new(5, "cli-test");
    let a = LSystem::random(&f2, &dims, 1, &mut rng).unwrap();
    let b = LSystem::random(&f2, &dims, 1, &mut rng).unwrap();
    let pa = write(&dir, "a.json", &lsystem_file(&a));
    let pb = write(&dir, "b.json", &lsystem_file(&b));
    let v = trl(&["lsystem", "validate", "-i", s(&pa)]);
    assert_eq!(v.code, 0);
    assert_eq!(v.json()["results"]["valid"], true);

    let out = dir.path().join("c.json");
    let r = trl(&["lsystem", "intersect", "-i", s(&pa), s(&pb), "--artifact", s(&out)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.json()["results"]["bound"], 2);
    let c = inputs::lsystem(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(c, a.intersect(&b).unwrap());

    let cons = ConstraintFile {
        field: f2.descriptor(),
        dims: dims.to_vec(),
        spaces: vec![ConstraintSpaceFile {
            modes: vec![1, 2],
            space: Subspace::span(&f2, 9, &[vec![f2.elem(1).unwrap(); 9]]).unwrap().orthogonal_complement().to_file(),
        }],
    };
    let pc = write(&dir, "cons.json", &serde_json::to_string(&cons).unwrap());
    let r = trl(&["lsystem", "restrict", "-i", s(&pa), "--constraints", s(&pc)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.json()["results"]["bound"], 5);

    // a node of codimension 2 in a declared 1-system
    let mut file = a.to_file();
    file.nodes[0].basis = vec![vec![1, 0, 0]];
    let bad = write(&dir, "bad.json", &serde_json::to_string(&file).unwrap());
    let r = trl(&["lsystem", "validate", "-i", s(&bad)]);
    assert_eq!(r.code, 2);
    assert_eq!(r.json()["results"]["valid"], false);
}

#[test]
fn find_system_on_full_multiset() {
    let dir = TempDir::new().unwrap();
    let bp = ProductMultiset::all(&f(2), &[2, 2]).unwrap();
    let p = write(&dir, "bp.json", &serde_json::to_string(&bp.to_file()).unwrap());
    let out = dir.path().join("sys.json");
    let r = trl(&["find-system", "-i", s(&p), "--delta", "1/2", "--artifact", s(&out)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let j = r.json();
    assert_eq!(j["results"]["valid"], true);
    assert!(j["results"]["max_plus"].as_u64().unwrap() <= 16);
    let art: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(art["certificates"].as_array().unwrap().len(), j["results"]["certified"].as_u64().unwrap() as usize);
}

fn one_hot_forcing() -> ForcingFile {
    let f2 = f(2);
    ForcingFile {
        field: f2.descriptor(),
        dims: vec![2, 2, 2],
        q: (0..8)
            .map(|j| ForcingMember {
                entries: (0..8).map(|b| u32::from(b == j)).collect(),
                multiplicity: 1,
            })
            .collect(),
        spaces: [vec![1], vec![2], vec![1, 2]]
            .into_iter()
            .map(|modes| {
                let n = 2usize.pow(modes.len() as u32);
                ForcingSpace {
                    modes,
                    space: Subspace::zero(&f2, n).to_file(),
                }
            })
            .collect(),
    }
}

#[test]
fn forcing_check_one_hot() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "q.json", &serde_json::to_string(&one_hot_forcing()).unwrap());
    let j = trl(&["forcing-check", "-i", s(&p)]).json();
    assert_eq!(j["results"]["forcing"], true);
    assert_eq!(j["results"]["k"], 0);
    assert_eq!(j["summary"], "(0, 1)-forcing");
    // at alpha = 1/2 many nonzero arrays are collected and none lies in {0}
    let half = trl(&["forcing-check", "-i", s(&p), "--alpha", "1/2"]).json();
    assert_eq!(half["results"]["forcing"], false);
    assert_eq!(trl(&["forcing-check", "-i", s(&p), "--alpha", "3/2"]).code, 2);
}

#[test]
fn ensemble_tables() {
    let d = trl(&["ensemble", "degenerate", "-k", "1", "--count", "8"]).json();
    for row in d["results"]["table"]["rows"].as_array().unwrap() {
        assert!(row["summands"].as_u64().unwrap() <= 4);
        assert_eq!(row["verified"], true);
    }
    let p = trl(&["ensemble", "random-poly", "--q", "3", "--nvars", "2", "--degree", "2", "--count", "8"]).json();
    for row in p["results"]["table"]["rows"].as_array().unwrap() {
        assert!(row["U^1"].as_f64().unwrap() <= row["U^2"].as_f64().unwrap() + 1e-9);
    }
    assert_eq!(p["seed"], 0);
    let a = trl(&["ensemble", "random-tensor", "--count", "5", "--seed", "3"]);
    let b = trl(&["ensemble", "random-tensor", "--count", "5", "--seed", "3"]);
    let c = trl(&["ensemble", "random-tensor", "--count", "5", "--seed", "4"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn selftest_passes() {
    let r = trl(&["selftest", "--format", "text"]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert!(r.stdout.contains("10 of 10 checks passed"));
}

// parse -> serialize -> parse is the identity for every input format

#[test]
fn tensor_round_trip() {
    let mut rng = Stream::new(1, "round-trip");
    for q in [2, 3, 4, 5] {
        let fs = FieldSpec::of_order(q).unwrap();
        let t = trl_cli::ensemble::random_tensor(&fs, &[2, 3, 2], &mut rng).unwrap();
        assert_eq!(inputs::tensor(&t.to_json()).unwrap(), t);
        assert_eq!(inputs::tensor(&t.to_text()).unwrap(), t);
    }
}

#[test]
fn polynomial_round_trip() {
    let mut rng = Stream::new(2, "round-trip");
    let p = trl_core::poly::random_polynomial(&f(5), 3, 3, &mut rng).unwrap();
    let again = inputs::polynomial(&p.to_json()).unwrap();
    assert_eq!(again, p);
    assert_eq!(again.to_json(), p.to_json());
}

#[test]
fn set_round_trip() {
    let set = PointSet::new(&f(3), 3, [0, 5, 7, 26]).unwrap();
    let again = inputs::point_set(&set.to_text()).unwrap();
    assert_eq!(again.members(), set.members());
    assert_eq!(again.to_text(), set.to_text());
}

#[test]
fn multiset_and_system_round_trip() {
    let mut rng = Stream::new(3, "round-trip");
    let bp = ProductMultiset::random_subset(&f(2), &[2, 3], 1, 2, &mut rng).unwrap();
    let text = serde_json::to_string(&bp.to_file()).unwrap();
    let again = inputs::multiset(&text).unwrap();
    assert_eq!(serde_json::to_string(&again.to_file()).unwrap(), text);

    let sys = LSystem::random(&f(3), &[2, 2], 1, &mut rng).unwrap();
    let again = inputs::lsystem(&lsystem_file(&sys)).unwrap();
    assert_eq!(again, sys);
    assert_eq!(again.dump(), sys.dump());
}

#[test]
fn constraint_and_forcing_round_trip() {
    let f2 = f(2);
    let cons = ConstraintFile {
        field: f2.descriptor(),
        dims: vec![2, 2],
        spaces: vec![ConstraintSpaceFile {
            modes: vec![1],
            space: Subspace::zero(&f2, 2).to_file(),
        }],
    };
    let text = serde_json::to_string(&cons).unwrap();
    let (fs, dims, map) = inputs::constraints(&text).unwrap();
    assert_eq!((fs, dims), (f2.clone(), vec![2, 2]));
    assert_eq!(map[&vec![0]], Subspace::zero(&f2, 2));

    let file = one_hot_forcing();
    let text = serde_json::to_string(&file).unwrap();
    let back: ForcingFile = serde_json::from_str(&text).unwrap();
    assert_eq!(back, file);
    let data = inputs::forcing(&text).unwrap();
    assert_eq!(data.q.len(), 8);
    assert!(data.spaces.contains_key(&vec![0, 1]));
}
