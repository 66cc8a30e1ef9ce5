// Drive the command line in-process, save its configuration and replay it.

use curved2body::cli;

fn run(args: &[&str]) -> (i32, Vec<u8>) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli::run(std::iter::once("curved2body").chain(args.iter().copied()), &mut out, &mut err);
    (code, out)
}

pub fn run_example() -> std::io::Result<()> {
    let dir = std::env::temp_dir().join(format!("curved2body-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let config = dir.join("eigs.json");
    let config_arg = config.to_str().expect("utf-8 temp path");

    let (code, first) = run(&["eigs", "--kappa", "-0.3", "--mu", "0.5", "--q", "1.4", "--save-config", config_arg]);
    println!("eigs exit code {code}, {} bytes", first.len());
    println!("saved configuration:\n{}", std::fs::read_to_string(&config)?);

    let (code, again) = run(&["replay", config_arg]);
    println!("replay exit code {code}, identical output: {}", first == again);
    assert_eq!(first, again);

    let (code, _) = run(&["classify", "--kappa", "0.2", "--mu", "0.5", "--q", "50"]);
    println!("separation beyond the antipode exits with {code}");
    std::fs::remove_dir_all(&dir)
}

fn main() -> std::io::Result<()> {
    run_example()
}
