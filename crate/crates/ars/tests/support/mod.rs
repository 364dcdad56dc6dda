#![allow(dead_code)]

use std::io::{Read, Write};
use std::net::{SocketAddr, TcpStream};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use ars::service::{router, AppState};
use ars_core::{ClassId, ClassKind, GraphBuilder, GraphSnapshot, KernelClass, KernelId, ObjectId};

#[path = "../../../core/tests/oracle/mod.rs"]
pub mod oracle;

pub fn classes(w1: u32, w2: u32) -> Vec<KernelClass> {
    vec![
        KernelClass::new(1, "orders", ClassKind::Behavioural, w1).unwrap(),
        KernelClass::new(2, "categories", ClassKind::Static, w2).unwrap(),
    ]
}

pub fn snapshot_of(arcs: &[oracle::RawArc], classes: Vec<KernelClass>) -> GraphSnapshot {
    let mut b = GraphBuilder::with_classes(classes).unwrap();
    for &(k, o, c) in arcs {
        b.add_arc(KernelId(k), ObjectId(o), ClassId(c)).unwrap();
    }
    b.freeze()
}

pub fn f1() -> GraphSnapshot {
    snapshot_of(&oracle::F1, classes(1, 1))
}

/// Writes F1 as an edge list inside `dir` and returns its path.
pub fn write_f1(dir: &Path) -> PathBuf {
    let path = dir.join("f1.csv");
    ars::edge_list::save_edge_list(&f1(), &path).unwrap();
    path
}

/// Serves `state` on an ephemeral port from a background runtime.
pub fn spawn_service(state: Arc<AppState>) -> SocketAddr {
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(4)
            .enable_all()
            .build()
            .unwrap();
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            tx.send(listener.local_addr().unwrap()).unwrap();
            axum::serve(listener, router(state)).await.unwrap();
        });
    });
    rx.recv().unwrap()
}

/// Minimal HTTP/1.1 client: returns the status code and the parsed JSON body.
pub fn http(addr: SocketAddr, method: &str, path: &str) -> (u16, serde_json::Value) {
    let mut stream = TcpStream::connect(addr).unwrap();
    write!(
        stream,
        "{method} {path} HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\nContent-Length: 0\r\n\r\n"
    )
    .unwrap();
    let mut text = String::new();
    stream.read_to_string(&mut text).unwrap();
    let status: u16 = text.split(' ').nth(1).unwrap().parse().unwrap();
    let body = text.split_once("\r\n\r\n").map(|(_, b)| b).unwrap_or("");
    let value = serde_json::from_str(body).unwrap_or(serde_json::Value::Null);
    (status, value)
}
