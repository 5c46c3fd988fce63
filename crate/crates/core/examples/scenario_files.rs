//! Scenario files and result tables: the formats the `cloudgame` binary reads
//! and writes.
//!
//! cargo run --example scenario_files

use std::path::Path;

use cloudgame::cli::{load_scenario, ResultTable, ScenarioFile};
use cloudgame::game1::solve_game1;

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/duopoly.json");
    let loaded = load_scenario(&path, true).unwrap();
    let eq = solve_game1(&loaded.scenario, &[0.2, 0.1]).unwrap();

    let csv = ResultTable::from_result(&loaded.scenario, &eq).to_csv();
    print!("{csv}");
    let back = ResultTable::parse(&csv).unwrap();
    println!("read back {} rows, game {}", back.rows.len(), back.game.id());

    let file = ScenarioFile::from_scenario(&loaded.scenario, None);
    println!("{}", file.to_json());
}
