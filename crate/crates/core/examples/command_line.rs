//! Driving the command-line interface in-process: a verdict-false check,
//! its replay, and an SVG rendering.

fn main() {
    let dir = std::env::temp_dir().join("minkkit-example");
    std::fs::create_dir_all(&dir).expect("temp dir");
    let doc = dir.join("witness.json");
    let svg = dir.join("l4.svg");
    let doc_s = doc.to_string_lossy().into_owned();
    let svg_s = svg.to_string_lossy().into_owned();

    let code = minkkit::cli::run([
        "minkkit", "check", "adjoint-abelian", "--model", "lp:4", "--op", "[[1,1],[0,1]]", "--out", &doc_s,
    ]);
    println!("check exited with {code}; witness written to {}", doc.display());
    let code = minkkit::cli::run(["minkkit", "replay", &doc_s]);
    println!("replay exited with {code}");
    let code = minkkit::cli::run([
        "minkkit", "render", "--model", "lp:4", "--theta", "0.3", "--theta", "1.2", "--contacts", "--out", &svg_s,
    ]);
    println!("render exited with {code}; SVG at {}", svg.display());
}
