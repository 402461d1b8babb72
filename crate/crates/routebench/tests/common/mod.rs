//! Shared test support: independent brute-force oracles and fixtures.
//! Everything here deliberately avoids the library's solver/validator code
//! paths so it can serve as a cross-check.
#![allow(dead_code)]

use std::collections::VecDeque;

use routebench::grid::{Coord, GridWorld, Obstacle, TaskCase};

/// Brute-force BFS distance over free in-bounds 4-neighbors. Independent of
/// the library solvers: its own neighbor order, its own obstacle test.
pub fn bfs_oracle_distance(world: &GridWorld, start: Coord, end: Coord) -> Option<u32> {
    let free = |c: Coord| {
        c.x >= 0
            && c.y >= 0
            && c.x < world.n_size
            && c.y < world.n_size
            && !world
                .obstacles
                .iter()
                .any(|o| o.top_left.x <= c.x && c.x <= o.bottom_right.x
                    && o.top_left.y <= c.y && c.y <= o.bottom_right.y)
    };
    if !free(start) || !free(end) {
        return None;
    }
    let n = world.n_size as usize;
    let mut dist = vec![u32::MAX; n * n];
    let idx = |c: Coord| c.x as usize * n + c.y as usize;
    dist[idx(start)] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(cur) = queue.pop_front() {
        if cur == end {
            return Some(dist[idx(cur)]);
        }
        // Deliberately a different order than the library's MOVE_ORDER.
        for (dx, dy) in [(-1, 0), (1, 0), (0, -1), (0, 1)] {
            let nb = Coord::new(cur.x + dx, cur.y + dy);
            if free(nb) && dist[idx(nb)] == u32::MAX {
                dist[idx(nb)] = dist[idx(cur)] + 1;
                queue.push_back(nb);
            }
        }
    }
    None
}

/// Independent cell-walk validator: returns true iff the point list is a
/// feasible route for the case (non-empty, right endpoints, unit steps,
/// in bounds, off obstacles).
pub fn brute_force_feasible(world: &GridWorld, case: &TaskCase, points: &[Coord]) -> bool {
    if points.is_empty() {
        return false;
    }
    if points[0] != case.start || *points.last().unwrap() != case.end {
        return false;
    }
    for w in points.windows(2) {
        let (dx, dy) = ((w[1].x - w[0].x).abs(), (w[1].y - w[0].y).abs());
        if dx + dy != 1 {
            return false;
        }
    }
    points.iter().all(|&c| {
        c.x >= 0
            && c.y >= 0
            && c.x < world.n_size
            && c.y < world.n_size
            && !world.obstacles.iter().any(|o| {
                o.top_left.x <= c.x && c.x <= o.bottom_right.x
                    && o.top_left.y <= c.y && c.y <= o.bottom_right.y
            })
    })
}

/// The worked Example-1 instance: start (3,7), end (4,3), two obstacles.
pub fn example1() -> (GridWorld, TaskCase) {
    let world = GridWorld::new(
        10,
        vec![
            Obstacle::new(Coord::new(1, 2), Coord::new(3, 4)),
            Obstacle::new(Coord::new(2, 5), Coord::new(4, 6)),
        ],
        0,
    );
    let case = TaskCase {
        case_id: "ex1".into(),
        env_index: 0,
        start: Coord::new(3, 7),
        end: Coord::new(4, 3),
        reference_path: vec![],
        optimal_len: 7,
    };
    (world, case)
}

/// Deterministic small random worlds for oracle sweeps.
pub fn random_world(seed: u64, index: u64, max_n: i32) -> GridWorld {
    let mut rng = routebench::rng::Rng::stream(seed, 99, index);
    let n = 4 + (rng.below((max_n - 3) as u64) as i32); // 4..=max_n
    let n_obstacles = rng.below(4) as usize;
    let mut obstacles = Vec::new();
    for _ in 0..n_obstacles {
        let side = 1 + rng.below(3.min(n as u64 - 1)) as i32;
        let tx = rng.below((n - side + 1) as u64) as i32;
        let ty = rng.below((n - side + 1) as u64) as i32;
        let cand = Obstacle::square(Coord::new(tx, ty), side);
        if obstacles.iter().all(|o: &Obstacle| {
            !(o.top_left.x <= cand.bottom_right.x
                && cand.top_left.x <= o.bottom_right.x
                && o.top_left.y <= cand.bottom_right.y
                && cand.top_left.y <= o.bottom_right.y)
        }) {
            obstacles.push(cand);
        }
    }
    GridWorld::new(n, obstacles, seed)
}

pub mod stub {
    //! Minimal blocking HTTP/1.1 stub serving the chat-completion shape.

    use std::io::{Read, Write};
    use std::net::{TcpListener, TcpStream};
    use std::sync::Arc;

    /// Maps the user-message content to (http status, reply content).
    pub type Handler = dyn Fn(&str) -> (u16, String) + Send + Sync;

    pub struct StubServer {
        pub base_url: String,
    }

    fn read_request(stream: &mut TcpStream) -> Option<String> {
        let mut buf = Vec::new();
        let mut chunk = [0u8; 4096];
        let header_end = loop {
            let n = stream.read(&mut chunk).ok()?;
            if n == 0 {
                return None;
            }
            buf.extend_from_slice(&chunk[..n]);
            if let Some(pos) = buf.windows(4).position(|w| w == b"\r\n\r\n") {
                break pos + 4;
            }
        };
        let headers = String::from_utf8_lossy(&buf[..header_end]).to_string();
        let content_length: usize = headers
            .lines()
            .find_map(|l| {
                let (k, v) = l.split_once(':')?;
                k.eq_ignore_ascii_case("content-length").then(|| v.trim().parse().ok())?
            })
            .unwrap_or(0);
        while buf.len() < header_end + content_length {
            let n = stream.read(&mut chunk).ok()?;
            if n == 0 {
                break;
            }
            buf.extend_from_slice(&chunk[..n]);
        }
        Some(String::from_utf8_lossy(&buf[header_end..header_end + content_length]).to_string())
    }

    fn handle(mut stream: TcpStream, handler: &Handler) {
        let Some(body) = read_request(&mut stream) else { return };
        let content = serde_json::from_str::<serde_json::Value>(&body)
            .ok()
            .and_then(|v| v["messages"][0]["content"].as_str().map(String::from))
            .unwrap_or_default();
        let (status, reply) = handler(&content);
        let body = if status == 200 {
            serde_json::json!({"choices": [{"message": {"role": "assistant", "content": reply}}]})
                .to_string()
        } else {
            serde_json::json!({"error": {"message": reply}}).to_string()
        };
        let reason = if status == 200 { "OK" } else { "Error" };
        let response = format!(
            "HTTP/1.1 {status} {reason}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
            body.len()
        );
        let _ = stream.write_all(response.as_bytes());
    }

    /// Start a stub on an ephemeral port. The accept thread is detached and
    /// lives for the remainder of the test process.
    pub fn serve(handler: Arc<Handler>) -> StubServer {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        std::thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(stream) = stream else { continue };
                let handler = Arc::clone(&handler);
                std::thread::spawn(move || handle(stream, handler.as_ref()));
            }
        });
        StubServer { base_url: format!("http://{addr}") }
    }
}
