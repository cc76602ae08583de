use quadnet_web::{example, grid, quadnet_text};

#[test]
fn grid_report_has_svg_and_verdicts() {
    let out = grid(7, 7, "alternating", 0, true, true).unwrap();
    assert_eq!(out["report"]["verdicts"]["all"], true);
    assert!(out["svg"].as_str().unwrap().contains("<svg"));
}

#[test]
fn float_and_exact_grids_agree_on_paths() {
    let exact = grid(6, 8, "br-tl", 3, false, true).unwrap();
    let float = grid(6, 8, "br-tl", 3, false, false).unwrap();
    assert_eq!(exact["report"]["vertical"]["path"], float["report"]["vertical"]["path"]);
    assert_eq!(exact["report"]["horizontal"]["path"], float["report"]["horizontal"]["path"]);
}

#[test]
fn bad_input_is_an_error() {
    assert!(grid(30, 5, "bl-tr", 0, true, true).is_err());
    assert!(grid(5, 5, "zigzag", 0, true, true).is_err());
    assert!(quadnet_text("quadnet 1\nvertex a\n", true).is_err());
}

#[test]
fn pasted_fixture_round_trips() {
    let out = quadnet_text(include_str!("../../core/fixtures/grid3.quadnet"), true).unwrap();
    assert_eq!(out["report"]["energy"], "1");
}

#[test]
fn example_checks_pass() {
    let out = example().unwrap();
    assert_eq!(out["report"]["energy"], "16/11");
    assert!(out["checks"].as_array().unwrap().iter().all(|c| c["ok"] == true));
    assert_eq!(out["reconstruction"]["distinctSignatures"], 1);
}
