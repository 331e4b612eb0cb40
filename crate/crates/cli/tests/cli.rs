use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::{json, Value};
use tempfile::TempDir;

/// Runs the binary in `dir` with whitespace-separated arguments.
fn sunflower(dir: &Path, args: &str) -> i32 {
    let out = Command::new(env!("CARGO_BIN_EXE_sunflower"))
        .current_dir(dir)
        .args(args.split_whitespace())
        .output()
        .unwrap();
    out.status.code().unwrap()
}

fn read(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn write(path: impl AsRef<Path>, v: &Value) {
    fs::write(path, serde_json::to_string(v).unwrap()).unwrap();
}

fn path3() -> Value {
    json!({"signature": [{"name": "E", "arity": 2, "kind": "symmetric"}], "size": 3,
           "relations": {"E": [[0, 1], [1, 0], [1, 2], [2, 1]]}})
}

#[test]
fn verify_witness_exit_codes() {
    let d = TempDir::new().unwrap();
    let base = "verify-witness --class pure --b-size 3 --k 2 --mode exhaustive";
    assert_eq!(sunflower(d.path(), &format!("{base} --c-size 7 --out seven")), 0);
    assert_eq!(sunflower(d.path(), &format!("{base} --c-size 6 --out six")), 1);
    let cx = read(d.path().join("six/counterexample.json"));
    assert_eq!(cx["k"], 2);
    assert_eq!(cx["sets"].as_array().unwrap().len(), 6);
    let manifest = read(d.path().join("six/manifest.json"));
    assert_eq!(manifest["command"], "verify-witness");
    assert_eq!(manifest["exit_status"], 1);
}

#[test]
fn usage_and_budget_errors() {
    let d = TempDir::new().unwrap();
    assert_eq!(sunflower(d.path(), "no-such-command"), 2);
    // randomized commands refuse to run without a seed
    assert_eq!(sunflower(d.path(), "gen --id random-graph --size 5"), 2);
    assert_eq!(
        sunflower(d.path(), "verify-witness --b-size 3 --c-size 7 --k 2 --budget 10"),
        3
    );
}

#[test]
fn build_extract_and_verify() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    assert_eq!(
        sunflower(p, "build-witness --class graphs --b-size 2 --k 2 --seed 4 --out w"),
        0
    );
    let chain = read(p.join("w/chain.json"));
    let top = chain["levels"][1]["structure"].clone();
    let n = top["size"].as_u64().unwrap() as u32;
    let sets: Vec<Vec<u32>> = (0..n).map(|v| vec![2 * v, 2 * v + 1]).collect();
    write(p.join("p.json"), &json!({"k": 2, "sets": sets}));
    write(p.join("top.json"), &top);
    write(p.join("k2.json"), &chain["target"]);
    assert_eq!(
        sunflower(p, "extract --chain w/chain.json --presentation p.json --out e"),
        0
    );
    let cert = read(p.join("e/certificate.json"));
    assert_eq!(cert["centre"], json!([]));
    let files = "--b k2.json --structure top.json --presentation p.json";
    assert_eq!(
        sunflower(p, &format!("verify-cert --cert e/certificate.json {files} --out v")),
        0
    );
    let replay = "verify-trace --chain w/chain.json --presentation p.json --trace e/trace.json";
    assert_eq!(sunflower(p, &format!("{replay} --cert e/certificate.json --out t")), 0);

    // widening the centre breaks the certificate
    let mut bad = cert.clone();
    bad["centre"] = json!([0]);
    write(p.join("bad.json"), &bad);
    assert_eq!(
        sunflower(p, &format!("verify-cert --cert bad.json {files} --out vb")),
        1
    );
    assert_eq!(read(p.join("vb/verdict.json"))["valid"], false);
}

#[test]
fn identical_runs_give_identical_files() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    for out in ["a", "b"] {
        let args = format!("hypergraph generate --n 2 --s 1 --c 6 --seed 3 --out {out}");
        assert_eq!(sunflower(p, &args), 0);
    }
    let a = fs::read(p.join("a/hypergraph.json")).unwrap();
    let b = fs::read(p.join("b/hypergraph.json")).unwrap();
    assert_eq!(a, b);
    assert_eq!(
        sunflower(p, "hypergraph girth --hypergraph a/hypergraph.json --out g"),
        0
    );
    let girth = read(p.join("g/girth.json"))["girth"].clone();
    assert!(girth.is_null() || girth.as_u64().unwrap() >= 4);
    let adv = sunflower(p, "hypergraph adversary --hypergraph a/hypergraph.json --s 1 --out adv");
    assert!(adv == 0 || adv == 1);
    let found = !read(p.join("adv/adversary.json"))["counterexample"].is_null();
    assert_eq!(adv == 1, found);
}

#[test]
fn generate_partition_and_paste() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    assert_eq!(sunflower(p, "gen --id knfree(3) --size 40 --seed 1 --out g"), 0);
    let partition = "partition --structure g/structure.json --scheme neighbourhood --anchor 0";
    assert_eq!(
        sunflower(p, &format!("{partition} --class k3-free --format csv --out part")),
        0
    );
    let blocks = read(p.join("part/partition.json"))["blocks"].as_array().unwrap().len();
    assert_eq!(blocks, 2);
    let csv = fs::read_to_string(p.join("part/report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);

    assert_eq!(
        sunflower(p, "hypergraph generate --n 3 --s 1 --c 3 --seed 2 --out h"),
        0
    );
    write(p.join("p3.json"), &path3());
    assert_eq!(
        sunflower(
            p,
            "paste --hypergraph h/hypergraph.json --b p3.json --class k3-free --out pasted"
        ),
        0
    );
    assert_eq!(read(p.join("pasted/structure.json"))["size"], 9);
}

#[test]
fn encode_and_check() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    write(p.join("m.json"), &path3());
    write(p.join("chi.json"), &json!({"values": [0, 0, 1]}));
    assert_eq!(
        sunflower(p, "encode --structure m.json --colouring chi.json --out enc"),
        0
    );
    assert_eq!(
        read(p.join("enc/presentation.json")),
        json!({"k": 2, "sets": [[0, 3], [1, 3], [2, 4]]})
    );
    // the non-edge {0,2} is heterochromatic, so its sets are disjoint
    let check = "sunflower-check --structure m.json --presentation enc/presentation.json";
    assert_eq!(sunflower(p, &format!("{check} --b-size 2 --out sc")), 0);
    assert_eq!(read(p.join("sc/certificates.json")).as_array().unwrap().len(), 1);
    assert_eq!(sunflower(p, "check-3dap --class k3-free --bound 1 --out dap"), 1);
    assert_eq!(sunflower(p, "suitable-params --n 2 --a1 1/2 --out sp"), 0);
    assert_eq!(read(p.join("sp/params.json"))["c_min"], 17);
    assert_eq!(sunflower(p, "enumerate-presentations --c-size 2 --k 2 --out en"), 0);
    assert_eq!(read(p.join("en/presentations.json")).as_array().unwrap().len(), 2);
}
