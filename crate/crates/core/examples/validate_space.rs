//! Builds a small metric measure space by hand, validates it, and shows what a
//! broken one reports.
use synthric::io::{parse_mms_csv, write_mms_csv};
use synthric::FiniteMMS;

fn main() -> synthric::Result<()> {
    // The 4-cycle with unit edges and one heavier vertex.
    let rows = vec![
        vec![0.0, 1.0, 2.0, 1.0],
        vec![1.0, 0.0, 1.0, 2.0],
        vec![2.0, 1.0, 0.0, 1.0],
        vec![1.0, 2.0, 1.0, 0.0],
    ];
    let space = FiniteMMS::from_rows(&rows, vec![2.0, 1.0, 1.0, 1.0])?;
    println!("n = {}, diameter = {}, total mass = {}", space.n(), space.diameter(), space.total_mass());
    println!("valid: {}", space.validate().is_valid());

    let text = write_mms_csv(&space);
    print!("{text}");
    assert_eq!(parse_mms_csv(&text)?.dist_matrix(), space.dist_matrix());

    // Shortcut 0 — 2 of length 5 breaks the triangle inequality through 1.
    let mut bad = rows.clone();
    bad[0][2] = 5.0;
    bad[2][0] = 5.0;
    let report = FiniteMMS::from_rows(&bad, vec![1.0; 4])?.validate();
    println!("broken space: {}", serde_json::to_string_pretty(&report).unwrap());
    Ok(())
}
