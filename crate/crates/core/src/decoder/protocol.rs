//! Newline-delimited JSON decoder protocol.
//!
//! ```text
//! peer -> client (once):  {"latent_dim": 150, "name": "fpvae"}
//! client -> peer:         {"id": 7, "z": [0.1, ...]}
//! peer -> client:         {"id": 7, "ok": true, "smiles": "CCO"}
//!                         {"id": 8, "ok": false, "error": "..."}
//! ```
//!
//! Responses may arrive in any order; the client matches them by id.
//! A frame the peer cannot parse is answered with `{"ok": false, "error": ..}`
//! and no id.

use super::{check_dims, DecodeResult, Decoder, DecoderError};
use crate::bridge::LatentVector;
use serde::{Deserialize, Serialize};
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::net::TcpStream;
use std::os::unix::net::UnixStream;
use std::path::PathBuf;
use std::process::{Child, Command, Stdio};
use std::sync::mpsc;
use std::time::{Duration, Instant};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endpoint {
    /// Shell command whose stdin/stdout carry the protocol.
    Exec(String),
    Tcp(String),
    Unix(PathBuf),
}

impl std::str::FromStr for Endpoint {
    type Err = String;

    fn from_str(s: &str) -> Result<Endpoint, String> {
        match s.split_once(':') {
            Some(("exec", cmd)) if !cmd.is_empty() => Ok(Endpoint::Exec(cmd.to_string())),
            Some(("tcp", addr)) if !addr.is_empty() => Ok(Endpoint::Tcp(addr.to_string())),
            Some(("unix", path)) if !path.is_empty() => Ok(Endpoint::Unix(PathBuf::from(path))),
            _ => Err(format!("endpoint '{s}' must be exec:<command>, tcp:<host:port> or unix:<path>")),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Handshake {
    latent_dim: usize,
    name: String,
}

#[derive(Serialize, Deserialize)]
struct Request {
    id: u64,
    z: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Response {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<u64>,
    ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    smiles: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

pub struct ProtocolClient {
    name: String,
    latent_dim: usize,
    writer: Box<dyn Write + Send>,
    lines: mpsc::Receiver<io::Result<String>>,
    child: Option<Child>,
    timeout: Duration,
    next_id: u64,
}

fn transport(e: impl std::fmt::Display) -> DecoderError {
    DecoderError::Transport(e.to_string())
}

impl ProtocolClient {
    pub fn connect(endpoint: &Endpoint, timeout: Duration) -> Result<ProtocolClient, DecoderError> {
        match endpoint {
            Endpoint::Exec(cmd) => {
                let mut child = Command::new("sh")
                    .arg("-c")
                    .arg(cmd)
                    .stdin(Stdio::piped())
                    .stdout(Stdio::piped())
                    .spawn()
                    .map_err(transport)?;
                let stdin = child.stdin.take().expect("piped");
                let stdout = child.stdout.take().expect("piped");
                let mut client = ProtocolClient::from_streams(stdout, stdin, timeout)?;
                client.child = Some(child);
                Ok(client)
            }
            Endpoint::Tcp(addr) => {
                let stream = TcpStream::connect(addr).map_err(transport)?;
                let reader = stream.try_clone().map_err(transport)?;
                ProtocolClient::from_streams(reader, stream, timeout)
            }
            Endpoint::Unix(path) => {
                let stream = UnixStream::connect(path).map_err(transport)?;
                let reader = stream.try_clone().map_err(transport)?;
                ProtocolClient::from_streams(reader, stream, timeout)
            }
        }
    }

    /// Starts the reader thread and waits for the handshake frame.
    pub fn from_streams<R, W>(reader: R, writer: W, timeout: Duration) -> Result<ProtocolClient, DecoderError>
    where
        R: Read + Send + 'static,
        W: Write + Send + 'static,
    {
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            for line in BufReader::new(reader).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        let mut client = ProtocolClient {
            name: String::new(),
            latent_dim: 0,
            writer: Box::new(BufWriter::new(writer)),
            lines: rx,
            child: None,
            timeout,
            next_id: 0,
        };
        let line = client.recv(Instant::now() + timeout)?;
        let hs: Handshake = serde_json::from_str(&line)
            .map_err(|e| DecoderError::Protocol(format!("bad handshake '{line}': {e}")))?;
        if hs.latent_dim == 0 {
            return Err(DecoderError::Protocol("handshake advertises latent_dim 0".into()));
        }
        client.name = hs.name;
        client.latent_dim = hs.latent_dim;
        Ok(client)
    }

    pub fn set_timeout(&mut self, timeout: Duration) {
        self.timeout = timeout;
    }

    fn recv(&self, deadline: Instant) -> Result<String, DecoderError> {
        let wait = deadline.saturating_duration_since(Instant::now());
        match self.lines.recv_timeout(wait) {
            Ok(Ok(line)) => Ok(line),
            Ok(Err(e)) => Err(transport(e)),
            Err(mpsc::RecvTimeoutError::Timeout) => Err(DecoderError::Timeout(self.timeout)),
            Err(mpsc::RecvTimeoutError::Disconnected) => Err(transport("peer closed the connection")),
        }
    }
}

impl Decoder for ProtocolClient {
    fn name(&self) -> &str {
        &self.name
    }

    fn latent_dim(&self) -> usize {
        self.latent_dim
    }

    fn decode_batch(&mut self, zs: &[LatentVector]) -> Result<Vec<DecodeResult>, DecoderError> {
        check_dims(zs, self.latent_dim)?;
        let base = self.next_id;
        self.next_id += zs.len() as u64;
        let deadline = Instant::now() + self.timeout;
        for (i, z) in zs.iter().enumerate() {
            let frame = serde_json::to_string(&Request { id: base + i as u64, z: z.components.clone() })
                .expect("finite floats serialize");
            self.writer.write_all(frame.as_bytes()).map_err(transport)?;
            self.writer.write_all(b"\n").map_err(transport)?;
        }
        self.writer.flush().map_err(transport)?;

        let mut out: Vec<Option<DecodeResult>> = vec![None; zs.len()];
        let mut remaining = zs.len();
        while remaining > 0 {
            let line = self.recv(deadline)?;
            if line.trim().is_empty() {
                continue;
            }
            let resp: Response = serde_json::from_str(&line)
                .map_err(|e| DecoderError::Protocol(format!("malformed frame '{line}': {e}")))?;
            let Some(id) = resp.id else {
                let msg = resp.error.unwrap_or_else(|| "error frame without id".into());
                return Err(DecoderError::Protocol(format!("peer rejected a frame: {msg}")));
            };
            if id < base {
                // late answer to a batch that already timed out
                continue;
            }
            let slot = out
                .get_mut((id - base) as usize)
                .ok_or_else(|| DecoderError::Protocol(format!("unexpected id {id}")))?;
            if slot.is_some() {
                return Err(DecoderError::Protocol(format!("id {id} answered twice")));
            }
            *slot = Some(match (resp.ok, resp.smiles) {
                (true, Some(s)) => Ok(s),
                (true, None) => return Err(DecoderError::Protocol(format!("ok response {id} without smiles"))),
                (false, _) => Err(resp.error.unwrap_or_else(|| "decode failed".into())),
            });
            remaining -= 1;
        }
        Ok(out.into_iter().map(|r| r.expect("all slots filled")).collect())
    }
}

impl Drop for ProtocolClient {
    fn drop(&mut self) {
        self.writer = Box::new(io::sink());
        if let Some(child) = &mut self.child {
            let deadline = Instant::now() + Duration::from_secs(2);
            while Instant::now() < deadline {
                if let Ok(Some(_)) = child.try_wait() {
                    return;
                }
                std::thread::sleep(Duration::from_millis(10));
            }
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

const MAX_SERVER_BATCH: usize = 512;

/// Serves one connection until EOF. Requests already buffered are decoded
/// together; answers go out in request order.
pub fn serve<R: Read, W: Write>(decoder: &mut dyn Decoder, input: R, output: W) -> io::Result<u64> {
    let mut input = BufReader::new(input);
    let mut out = BufWriter::new(output);
    let hs = Handshake { latent_dim: decoder.latent_dim(), name: decoder.name().to_string() };
    writeln!(out, "{}", serde_json::to_string(&hs).expect("serializable"))?;
    out.flush()?;
    let mut served = 0;
    let mut line = String::new();
    loop {
        let mut batch: Vec<Request> = Vec::new();
        let mut replies: Vec<Response> = Vec::new();
        loop {
            line.clear();
            if input.read_line(&mut line)? == 0 {
                break;
            }
            if !line.trim().is_empty() {
                match serde_json::from_str::<Request>(&line) {
                    Ok(req) if req.z.len() != decoder.latent_dim() => replies.push(Response {
                        id: Some(req.id),
                        ok: false,
                        smiles: None,
                        error: Some(format!("dimension mismatch: expected {}, got {}", decoder.latent_dim(), req.z.len())),
                    }),
                    Ok(req) => batch.push(req),
                    Err(e) => replies.push(Response { id: None, ok: false, smiles: None, error: Some(e.to_string()) }),
                }
            }
            if batch.len() + replies.len() >= MAX_SERVER_BATCH || !input.buffer().contains(&b'\n') {
                break;
            }
        }
        if batch.is_empty() && replies.is_empty() {
            return Ok(served);
        }
        let zs: Vec<LatentVector> = batch.iter().map(|r| LatentVector::new(r.z.clone())).collect();
        match decoder.decode_batch(&zs) {
            Ok(results) => {
                for (req, res) in batch.iter().zip(results) {
                    replies.push(match res {
                        Ok(s) => Response { id: Some(req.id), ok: true, smiles: Some(s), error: None },
                        Err(e) => Response { id: Some(req.id), ok: false, smiles: None, error: Some(e) },
                    });
                }
            }
            Err(e) => {
                for req in &batch {
                    replies.push(Response { id: Some(req.id), ok: false, smiles: None, error: Some(e.to_string()) });
                }
            }
        }
        for r in &replies {
            writeln!(out, "{}", serde_json::to_string(r).expect("serializable"))?;
        }
        served += replies.len() as u64;
        out.flush()?;
    }
}
