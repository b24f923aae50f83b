#![allow(dead_code)]

use std::io::{BufRead, BufReader};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};

use soilsense_core::imaging::{encode_pnm, PnmEncoding, RasterImage};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_soilsense"))
}

pub fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn soilsense")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Gray image with exactly `black` dark pixels spread over a white field
/// (multiplicative scatter, so no neighbourhood is mostly black).
pub fn speckled(w: usize, h: usize, black: usize) -> RasterImage {
    let n = w * h;
    let mut px = vec![255u8; n];
    let mut placed = 0;
    let mut i = 0usize;
    while placed < black {
        let k = (i * 7919) % n;
        if px[k] == 255 {
            px[k] = 0;
            placed += 1;
        }
        i += 1;
    }
    RasterImage::gray(w, h, px).unwrap()
}

pub fn write_pgm(path: &Path, img: &RasterImage) {
    std::fs::write(path, encode_pnm(img, PnmEncoding::Binary)).unwrap();
}

/// A running `soilsense serve`, killed on drop.
pub struct Served {
    pub child: Child,
    pub http: SocketAddr,
}

impl Served {
    pub fn start(data_dir: &Path, extra: &[&str]) -> Self {
        let mut child = bin()
            .args(["--data-dir", data_dir.to_str().unwrap(), "serve", "--http", "127.0.0.1:0", "--no-tcp"])
            .args(extra)
            .stdout(Stdio::null())
            .stderr(Stdio::piped())
            .spawn()
            .expect("spawn serve");
        let mut lines = BufReader::new(child.stderr.take().unwrap()).lines();
        let http = loop {
            let line = lines.next().expect("serve exited").unwrap();
            if let Some(addr) = line.strip_prefix("http listening on ") {
                break addr.parse().unwrap();
            }
        };
        // keep draining so the child never blocks on a full pipe
        std::thread::spawn(move || for _ in lines {});
        Self { child, http }
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.http)
    }
}

impl Drop for Served {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

pub fn http(method: &str, url: &str, body: Option<String>) -> (u16, String) {
    let rt = tokio::runtime::Runtime::new().unwrap();
    rt.block_on(async {
        let c = reqwest::Client::new();
        let req = match method {
            "POST" => c.post(url).body(body.unwrap_or_default()),
            _ => c.get(url),
        };
        let resp = req.send().await.unwrap();
        (resp.status().as_u16(), resp.text().await.unwrap())
    })
}
