//! Deterministic SVG renders of a task: grid, obstacle cells, endpoints,
//! reference path, and optionally a candidate path.

use crate::eval::CandidatePath;
use crate::grid::{Coord, GridWorld, TaskCase};

const CELL: i32 = 24;

// x is the row index, so it maps to the vertical axis.
fn center(c: Coord) -> (f64, f64) {
    (
        c.y as f64 * CELL as f64 + CELL as f64 / 2.0,
        c.x as f64 * CELL as f64 + CELL as f64 / 2.0,
    )
}

fn polyline(points: &[Coord], class: &str, out: &mut String) {
    let coords: Vec<String> = points
        .iter()
        .map(|&c| {
            let (px, py) = center(c);
            format!("{px},{py}")
        })
        .collect();
    out.push_str(&format!(
        "  <polyline class=\"{class}\" fill=\"none\" points=\"{}\"/>\n",
        coords.join(" ")
    ));
}

/// Render one task as a standalone SVG document. Byte-identical for
/// identical inputs.
pub fn render_grid_svg(world: &GridWorld, case: &TaskCase, cand: Option<&CandidatePath>) -> String {
    let side = world.n_size * CELL;
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {side} {side}\" width=\"{side}\" height=\"{side}\">\n"
    ));
    out.push_str(
        "  <style>.board{fill:#ffffff;stroke:#444444}.grid{stroke:#dddddd;stroke-width:1}\
.obstacle{fill:#555555}.reference{stroke:#1f77b4;stroke-width:3}\
.candidate{stroke:#d62728;stroke-width:2;stroke-dasharray:4 3}\
.start{fill:#2ca02c}.end{fill:#d62728}</style>\n",
    );
    out.push_str(&format!("  <rect class=\"board\" x=\"0\" y=\"0\" width=\"{side}\" height=\"{side}\"/>\n"));
    for i in 1..world.n_size {
        let p = i * CELL;
        out.push_str(&format!("  <line class=\"grid\" x1=\"{p}\" y1=\"0\" x2=\"{p}\" y2=\"{side}\"/>\n"));
        out.push_str(&format!("  <line class=\"grid\" x1=\"0\" y1=\"{p}\" x2=\"{side}\" y2=\"{p}\"/>\n"));
    }
    for obstacle in &world.obstacles {
        for cell in obstacle.cells() {
            out.push_str(&format!(
                "  <rect class=\"obstacle\" x=\"{}\" y=\"{}\" width=\"{CELL}\" height=\"{CELL}\"/>\n",
                cell.y * CELL,
                cell.x * CELL
            ));
        }
    }
    polyline(&case.reference_path, "reference", &mut out);
    if let Some(cand) = cand {
        if !cand.points.is_empty() {
            polyline(&cand.points, "candidate", &mut out);
        }
    }
    let (sx, sy) = center(case.start);
    let (ex, ey) = center(case.end);
    out.push_str(&format!("  <circle class=\"start\" cx=\"{sx}\" cy=\"{sy}\" r=\"6\"/>\n"));
    out.push_str(&format!("  <circle class=\"end\" cx=\"{ex}\" cy=\"{ey}\" r=\"6\"/>\n"));
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Obstacle;
    use crate::solvers;

    fn example1() -> (GridWorld, TaskCase) {
        let world = GridWorld::new(
            10,
            vec![
                Obstacle::new(Coord::new(1, 2), Coord::new(3, 4)),
                Obstacle::new(Coord::new(2, 5), Coord::new(4, 6)),
            ],
            0,
        );
        let path = solvers::dijkstra_shortest(&world, Coord::new(3, 7), Coord::new(4, 3))
            .unwrap()
            .unwrap();
        let case = TaskCase {
            case_id: "ex1".into(),
            env_index: 0,
            start: Coord::new(3, 7),
            end: Coord::new(4, 3),
            optimal_len: path.len() as u32,
            reference_path: path.points,
        };
        (world, case)
    }

    #[test]
    fn obstacle_cell_count() {
        // (1,2)-(3,4) covers 3x3 = 9 cells; (2,5)-(4,6) covers 3x2 = 6.
        let (world, case) = example1();
        let svg = render_grid_svg(&world, &case, None);
        assert_eq!(svg.matches("class=\"obstacle\"").count(), 15);
    }

    #[test]
    fn polyline_counts() {
        let (world, case) = example1();
        let svg = render_grid_svg(&world, &case, None);
        assert_eq!(svg.matches("<polyline").count(), 1);
        let cand = crate::eval::parse_path("[(3, 7), (3, 8)]");
        let svg = render_grid_svg(&world, &case, Some(&cand));
        assert_eq!(svg.matches("<polyline").count(), 2);
    }

    #[test]
    fn byte_identical() {
        let (world, case) = example1();
        assert_eq!(render_grid_svg(&world, &case, None), render_grid_svg(&world, &case, None));
    }
}
