//! Peer-to-peer transports.
//!
//! Wire format (both transports, and the unit of traffic accounting): a
//! frame is a 4-byte big-endian payload length followed by the payload;
//! payloads carrying protocol values hold canonical big-endian field
//! elements. The in-process transport moves frames over channels and is the
//! deterministic default; the socket transport speaks the same frames over
//! one duplex TCP connection per peer pair for wall-clock benchmarking.

use super::RuntimeError;
use crate::shamir::PartyId;
use std::io::{BufReader, BufWriter, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::mpsc::{channel, Receiver, Sender};
use std::thread::JoinHandle;

/// Frame length prefix size in bytes; counted as framing overhead by the
/// traffic meters.
pub const FRAME_OVERHEAD: u64 = 4;

/// Maximum accepted frame payload (guards against corrupt length prefixes).
const MAX_FRAME: u32 = 1 << 28;

/// One peer's view of the mesh.
pub trait Transport: Send {
    fn send(&mut self, to: PartyId, payload: &[u8]) -> Result<(), RuntimeError>;
    fn recv(&mut self, from: PartyId) -> Result<Vec<u8>, RuntimeError>;
}

// ---------------------------------------------------------------------------
// In-process transport
// ---------------------------------------------------------------------------

pub struct InprocTransport {
    me: PartyId,
    senders: Vec<Option<Sender<Vec<u8>>>>,
    receivers: Vec<Option<Receiver<Vec<u8>>>>,
}

/// Wire a full mesh of channel pairs for `kappa` peers.
pub fn inproc_mesh(kappa: usize) -> Vec<InprocTransport> {
    let mut txs: Vec<Vec<Option<Sender<Vec<u8>>>>> = (0..kappa)
        .map(|_| (0..kappa).map(|_| None).collect())
        .collect();
    let mut rxs: Vec<Vec<Option<Receiver<Vec<u8>>>>> = (0..kappa)
        .map(|_| (0..kappa).map(|_| None).collect())
        .collect();
    for from in 0..kappa {
        for to in 0..kappa {
            if from != to {
                let (tx, rx) = channel();
                txs[from][to] = Some(tx);
                rxs[to][from] = Some(rx);
            }
        }
    }
    txs.into_iter()
        .zip(rxs)
        .enumerate()
        .map(|(me, (senders, receivers))| InprocTransport {
            me,
            senders,
            receivers,
        })
        .collect()
}

impl Transport for InprocTransport {
    fn send(&mut self, to: PartyId, payload: &[u8]) -> Result<(), RuntimeError> {
        if to == self.me || to >= self.senders.len() {
            return Err(RuntimeError::Connection(format!("bad destination {to}")));
        }
        self.senders[to]
            .as_ref()
            .expect("mesh wired")
            .send(payload.to_vec())
            .map_err(|_| RuntimeError::Connection(format!("peer {to} hung up")))
    }

    fn recv(&mut self, from: PartyId) -> Result<Vec<u8>, RuntimeError> {
        if from == self.me || from >= self.receivers.len() {
            return Err(RuntimeError::Connection(format!("bad source {from}")));
        }
        self.receivers[from]
            .as_ref()
            .expect("mesh wired")
            .recv()
            .map_err(|_| RuntimeError::Connection(format!("peer {from} hung up")))
    }
}

// ---------------------------------------------------------------------------
// Socket transport
// ---------------------------------------------------------------------------

/// A duplex link with a dedicated writer thread, so a round's sends never
/// block on a peer that is also mid-send.
struct SocketLink {
    writer_tx: Option<Sender<Vec<u8>>>,
    reader: BufReader<TcpStream>,
    writer: Option<JoinHandle<()>>,
}

impl SocketLink {
    fn new(stream: TcpStream) -> Result<Self, RuntimeError> {
        stream
            .set_nodelay(true)
            .map_err(|e| RuntimeError::Connection(e.to_string()))?;
        let write_half = stream
            .try_clone()
            .map_err(|e| RuntimeError::Connection(e.to_string()))?;
        let (tx, rx): (Sender<Vec<u8>>, Receiver<Vec<u8>>) = channel();
        let writer = std::thread::spawn(move || {
            let mut w = BufWriter::new(write_half);
            while let Ok(frame) = rx.recv() {
                if w.write_all(&frame).is_err() {
                    break;
                }
                if w.flush().is_err() {
                    break;
                }
            }
        });
        Ok(SocketLink {
            writer_tx: Some(tx),
            reader: BufReader::new(stream),
            writer: Some(writer),
        })
    }

    fn send(&mut self, payload: &[u8]) -> Result<(), RuntimeError> {
        let mut frame = Vec::with_capacity(payload.len() + 4);
        frame.extend_from_slice(&(payload.len() as u32).to_be_bytes());
        frame.extend_from_slice(payload);
        self.writer_tx
            .as_ref()
            .expect("writer alive")
            .send(frame)
            .map_err(|_| RuntimeError::Connection("writer thread gone".into()))
    }

    fn recv(&mut self) -> Result<Vec<u8>, RuntimeError> {
        let mut len = [0u8; 4];
        self.reader
            .read_exact(&mut len)
            .map_err(|e| RuntimeError::Connection(e.to_string()))?;
        let len = u32::from_be_bytes(len);
        if len > MAX_FRAME {
            return Err(RuntimeError::Connection(format!("oversized frame: {len}")));
        }
        let mut payload = vec![0u8; len as usize];
        self.reader
            .read_exact(&mut payload)
            .map_err(|e| RuntimeError::Connection(e.to_string()))?;
        Ok(payload)
    }
}

impl Drop for SocketLink {
    fn drop(&mut self) {
        drop(self.writer_tx.take());
        if let Some(h) = self.writer.take() {
            let _ = h.join();
        }
    }
}

pub struct SocketTransport {
    links: Vec<Option<SocketLink>>,
}

impl Transport for SocketTransport {
    fn send(&mut self, to: PartyId, payload: &[u8]) -> Result<(), RuntimeError> {
        self.links
            .get_mut(to)
            .and_then(Option::as_mut)
            .ok_or_else(|| RuntimeError::Connection(format!("no link to {to}")))?
            .send(payload)
    }

    fn recv(&mut self, from: PartyId) -> Result<Vec<u8>, RuntimeError> {
        self.links
            .get_mut(from)
            .and_then(Option::as_mut)
            .ok_or_else(|| RuntimeError::Connection(format!("no link to {from}")))?
            .recv()
    }
}

/// Establish a loopback TCP mesh: every pair holds one duplex connection,
/// the lower-id peer accepting the higher-id peer's connect. Returns one
/// transport per peer; each is handed to that peer's thread.
pub fn socket_mesh(kappa: usize) -> Result<Vec<SocketTransport>, RuntimeError> {
    let listeners: Vec<TcpListener> = (0..kappa)
        .map(|_| TcpListener::bind("127.0.0.1:0"))
        .collect::<Result<_, _>>()
        .map_err(|e| RuntimeError::Connection(e.to_string()))?;
    let addrs: Vec<_> = listeners
        .iter()
        .map(|l| l.local_addr().expect("bound listener"))
        .collect();

    let handles: Vec<JoinHandle<Result<Vec<Option<SocketLink>>, RuntimeError>>> = listeners
        .into_iter()
        .enumerate()
        .map(|(me, listener)| {
            let addrs = addrs.clone();
            std::thread::spawn(move || {
                let mut links: Vec<Option<SocketLink>> = (0..kappa).map(|_| None).collect();
                // connect out to every lower id, announcing who we are
                for lower in 0..me {
                    let mut stream = TcpStream::connect(addrs[lower])
                        .map_err(|e| RuntimeError::Connection(e.to_string()))?;
                    stream
                        .write_all(&(me as u32).to_be_bytes())
                        .map_err(|e| RuntimeError::Connection(e.to_string()))?;
                    links[lower] = Some(SocketLink::new(stream)?);
                }
                // accept every higher id
                for _ in me + 1..kappa {
                    let (mut stream, _) = listener
                        .accept()
                        .map_err(|e| RuntimeError::Connection(e.to_string()))?;
                    let mut hello = [0u8; 4];
                    stream
                        .read_exact(&mut hello)
                        .map_err(|e| RuntimeError::Connection(e.to_string()))?;
                    let who = u32::from_be_bytes(hello) as usize;
                    if who <= me || who >= kappa {
                        return Err(RuntimeError::Connection(format!("bad hello {who}")));
                    }
                    links[who] = Some(SocketLink::new(stream)?);
                }
                Ok(links)
            })
        })
        .collect();

    let mut out = Vec::with_capacity(kappa);
    for h in handles {
        let links = h
            .join()
            .map_err(|_| RuntimeError::Connection("mesh setup panicked".into()))??;
        out.push(SocketTransport { links });
    }
    Ok(out)
}
