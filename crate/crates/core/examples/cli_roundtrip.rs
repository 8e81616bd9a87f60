//! Drives the command-line front end in-process: writes a matrix file, then
//! counts and samples from it.

use pardpp::cli;

fn main() {
    let dir = std::env::temp_dir().join("pardpp-example");
    std::fs::create_dir_all(&dir).expect("temp dir");
    let matrix = dir.join("l.txt");
    std::fs::write(&matrix, "3\n2 0.5 0.3\n0.5 1.5 0.2\n0.3 0.2 1\n").expect("write matrix");
    let m = matrix.to_str().expect("utf-8 path");
    for args in [
        vec!["pardpp", "count", "--matrix", m, "--k", "2"],
        vec!["pardpp", "sample", "--matrix", m, "--k", "2", "--samples", "3", "--seed", "9"],
    ] {
        println!("$ {}", args.join(" "));
        let code = cli::run(args);
        println!("exit {code}");
    }
}
