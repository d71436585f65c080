"""Environment wire service: newline-delimited JSON over TCP or stdio.

One connection owns one episode session and requests are answered strictly
in order. The shield runs on this side, so a remote trainer sends raw
proposals and sees the executed action, the intervention flag, and the
penalty exactly as an in-process caller would.

Request messages: {"type": "reset", "seed": int, "overrides"?: {...}},
{"type": "step", "action": 0..7}, {"type": "close"}. Replies: "obs" with the
observation payload, "transition" with reward fields plus the next "obs"
payload under "obs", "close", or "error" with a message (the session
survives errors).
"""
from __future__ import annotations

import json
import socketserver
import sys
from typing import Optional

from .config import ConfigError, EnvConfig
from .engine import EpisodeEngine, EpisodeDoneError, StepRecord
from .gridworld import N_ACTIONS


def obs_payload(engine: EpisodeEngine) -> dict:
    payload = engine.observation.to_payload()
    payload["feasible"] = [a in engine.feasible for a in range(N_ACTIONS)]
    payload["agent_cell"] = [engine.state.position[0], engine.state.position[1]]
    payload["step"] = engine.state.step_count
    payload["coverage"] = engine.coverage
    return payload


def transition_payload(engine: EpisodeEngine, record: StepRecord, done: bool) -> dict:
    return {
        "type": "transition",
        "reward": record.reward.value,
        "reward_terms": record.reward.to_json_dict(),
        "intervened": record.intervened,
        "executed_action": record.executed,
        "done": done,
        "obs": obs_payload(engine),
    }


def encode_message(message: dict) -> bytes:
    return (json.dumps(message, separators=(",", ":")) + "\n").encode("utf-8")


class ProtocolSession:
    """Sequential request handling for a single connection."""

    def __init__(self, config: EnvConfig):
        self.base_config = config
        self.engine: Optional[EpisodeEngine] = None

    def handle(self, message) -> tuple[dict, bool]:
        """Returns (reply, close_connection)."""
        if not isinstance(message, dict):
            return _error("message must be a JSON object"), False
        mtype = message.get("type")
        if mtype == "reset":
            return self._handle_reset(message), False
        if mtype == "step":
            return self._handle_step(message), False
        if mtype == "close":
            return {"type": "close"}, True
        return _error(f"unknown message type: {mtype!r}"), False

    def handle_line(self, line: str) -> tuple[dict, bool]:
        try:
            message = json.loads(line)
        except json.JSONDecodeError as exc:
            return _error(f"malformed JSON: {exc}"), False
        return self.handle(message)

    def _handle_reset(self, message: dict) -> dict:
        seed = message.get("seed")
        if not isinstance(seed, int) or isinstance(seed, bool):
            return _error("reset requires an integer 'seed'")
        overrides = message.get("overrides", {})
        if overrides is None:
            overrides = {}
        if not isinstance(overrides, dict):
            return _error("'overrides' must be an object")
        try:
            config = self.base_config.with_overrides(overrides)
        except ConfigError as exc:
            return _error(str(exc))
        self.engine = EpisodeEngine(config, seed)
        return {"type": "obs", **obs_payload(self.engine)}

    def _handle_step(self, message: dict) -> dict:
        if self.engine is None:
            return _error("step before reset")
        action = message.get("action")
        if not isinstance(action, int) or isinstance(action, bool):
            return _error("step requires an integer 'action'")
        if not 0 <= action < N_ACTIONS:
            return _error(f"action must be in 0..{N_ACTIONS - 1}, got {action}")
        try:
            record, _, done = self.engine.step(action)
        except EpisodeDoneError as exc:
            return _error(str(exc))
        return transition_payload(self.engine, record, done)


def _error(message: str) -> dict:
    return {"type": "error", "message": message}


class _RequestHandler(socketserver.StreamRequestHandler):
    def handle(self):
        session = ProtocolSession(self.server.env_config)
        for raw in self.rfile:
            line = raw.decode("utf-8").strip()
            if not line:
                continue
            reply, close = session.handle_line(line)
            self.wfile.write(encode_message(reply))
            self.wfile.flush()
            if close:
                break


class EnvServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, config: EnvConfig, host: str = "127.0.0.1", port: int = 0):
        super().__init__((host, port), _RequestHandler)
        self.env_config = config

    @property
    def port(self) -> int:
        return self.server_address[1]


def serve(config: EnvConfig, host: str = "127.0.0.1", port: int = 0) -> None:
    with EnvServer(config, host, port) as server:
        print(f"listening on {server.server_address[0]}:{server.port}", flush=True)
        server.serve_forever()


def serve_stdio(config: EnvConfig, rfile=None, wfile=None) -> None:
    rfile = rfile if rfile is not None else sys.stdin
    wfile = wfile if wfile is not None else sys.stdout
    session = ProtocolSession(config)
    for raw in rfile:
        line = raw.strip()
        if not line:
            continue
        reply, close = session.handle_line(line)
        wfile.write(encode_message(reply).decode("utf-8"))
        wfile.flush()
        if close:
            break
