"""HTTP session service: the engine asks pairwise queries, clients answer them.

One engine thread per session, parked on a mailbox while a query is
pending.  Sessions persist their answer log to disk after every step, so a
restarted service replays the log deterministically and resumes at the same
pending query.
"""

from __future__ import annotations

import json
import queue
import threading
import time
import uuid
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .constraints import Relation
from .data import Dataset, load_ucr, save_ucr
from .engine import Engine, EngineConfig
from .oracle import SessionAborted

_ANSWER_TIMEOUT = 60.0


class _Session:
    def __init__(self, session_id: str, dataset_id: str, ds: Dataset,
                 config: EngineConfig, prefix: list[tuple[int, int, Relation]],
                 store_path: Path | None):
        self.id = session_id
        self.dataset_id = dataset_id
        self.ds = ds
        self.config = config
        self.prefix = prefix
        self.store_path = store_path

        self.lock = threading.Lock()
        self.advanced = threading.Event()
        self._mailbox: queue.Queue = queue.Queue(maxsize=1)

        self.phase = "running"
        self.pending: tuple[int, int] | None = None
        self.pending_since: float | None = None
        self._claimed = False
        self._abort_requested = False
        self.answers: list[dict] = [
            {"i": i, "j": j, "relation": rel.value} for i, j, rel in prefix
        ]
        self.engine = Engine(ds, config, oracle=self, on_query=None)
        self.result = None
        self.error: str | None = None
        self.view = self.engine.view()
        self._replay_cursor = 0

        self.thread = threading.Thread(target=self._run, daemon=True)

    # -- engine-side oracle ---------------------------------------------------

    def answer(self, i: int, j: int) -> Relation:
        if self._replay_cursor < len(self.prefix):
            ri, rj, rel = self.prefix[self._replay_cursor]
            self._replay_cursor += 1
            if {ri, rj} != {i, j}:
                raise SessionAborted(
                    f"session file replay mismatch: expected ({ri}, {rj}), engine asked ({i}, {j})"
                )
            return rel
        with self.lock:
            if self._abort_requested:
                raise SessionAborted("session aborted by user")
            self.pending = (i, j)
            self.pending_since = time.monotonic()
            self._claimed = False
            self.phase = "awaiting_answer"
            self.view = self.engine.view()
        self.advanced.set()
        item = self._mailbox.get()
        with self.lock:
            latency = time.monotonic() - (self.pending_since or time.monotonic())
            self.pending = None
            self.pending_since = None
            self._claimed = False
            self.phase = "running"
        if item == "abort":
            raise SessionAborted("session aborted by user")
        self.answers.append({"i": i, "j": j, "relation": item.value,
                             "latency": round(latency, 6)})
        self._persist()
        return item

    def _run(self) -> None:
        try:
            self.result = self.engine.run()
            with self.lock:
                self.phase = "aborted" if self.result.aborted else "finished"
                self.view = self.result.view
        except Exception as err:  # engine/session errors surface via the API
            with self.lock:
                self.phase = "error"
                self.error = str(err)
        finally:
            self._persist()
            self.advanced.set()

    # -- client-side operations ------------------------------------------------

    def post_answer(self, relation: Relation) -> bool:
        with self.lock:
            if self.pending is None or self._claimed:
                return False
            self._claimed = True
            self.advanced.clear()
        self._mailbox.put(relation)
        self.advanced.wait(timeout=_ANSWER_TIMEOUT)
        return True

    def abort(self) -> None:
        with self.lock:
            if self.phase in ("finished", "aborted", "error"):
                return
            self._abort_requested = True
            claim = self.pending is not None and not self._claimed
            if claim:
                self._claimed = True
            self.advanced.clear()
        if claim:
            self._mailbox.put("abort")
        self.advanced.wait(timeout=_ANSWER_TIMEOUT)

    def query_payload(self) -> dict:
        with self.lock:
            if self.pending is None:
                return {
                    "phase": self.phase,
                    "queries_used": self.engine.store.queries_used,
                    "budget": self.config.budget,
                }
            i, j = self.pending
            return {
                "pair": [i, j],
                "series_i": [float(v) for v in self.ds.values[i]],
                "series_j": [float(v) for v in self.ds.values[j]],
                "queries_used": self.engine.store.queries_used,
                "budget": self.config.budget,
            }

    def clustering_payload(self) -> dict:
        with self.lock:
            view = self.view
            phase = self.phase
        clusters = []
        for cluster in view["clusters"]:
            members = sorted(
                idx for si in cluster["super_instances"] for idx in si["members"]
            )
            clusters.append({
                "id": cluster["id"],
                "members": members,
                "super_instances": [
                    {
                        **si,
                        "representative_series": [
                            float(v) for v in self.ds.values[si["representative"]]
                        ],
                    }
                    for si in cluster["super_instances"]
                ],
            })
        return {
            "phase": phase,
            "queries_used": view["queries_used"],
            "budget": view["budget"],
            "clusters": clusters,
        }

    def log_payload(self) -> dict:
        entries = [
            {
                "i": c.i,
                "j": c.j,
                "kind": c.kind.value,
                "origin": c.origin.value,
                "sequence_number": c.sequence_number,
            }
            for c in list(self.engine.store.log)
        ]
        return {"log": entries, "answers": list(self.answers)}

    def _persist(self) -> None:
        if self.store_path is None:
            return
        with self.lock:
            view = self.view
            phase = self.phase
        payload = {
            "session_id": self.id,
            "dataset_id": self.dataset_id,
            "config": self.config.to_dict(),
            "answers": self.answers,
            "phase": phase,
            # answers above drive the resume; state and log are for inspection
            "state": view,
            "log": self.log_payload()["log"],
        }
        tmp = self.store_path.with_suffix(".tmp")
        tmp.write_text(json.dumps(payload))
        tmp.replace(self.store_path)


def _bad_request(detail: str) -> JSONResponse:
    return JSONResponse({"detail": detail}, status_code=400)


def create_app(data_dir: str = ".", session_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="tsactive query sessions")
    data_path = Path(data_dir)
    data_path.mkdir(parents=True, exist_ok=True)
    session_path = Path(session_dir) if session_dir else data_path / ".sessions"
    session_path.mkdir(parents=True, exist_ok=True)

    datasets: dict[str, Dataset] = {}
    sessions: dict[str, _Session] = {}

    def _dataset(dataset_id: str) -> Dataset | None:
        if dataset_id in datasets:
            return datasets[dataset_id]
        for suffix in ("", ".txt", ".csv", ".tsv"):
            candidate = data_path / f"{dataset_id}{suffix}"
            if candidate.is_file():
                datasets[dataset_id] = load_ucr(candidate, name=dataset_id)
                return datasets[dataset_id]
        return None

    def _start_session(dataset_id: str, config: EngineConfig,
                       prefix: list[tuple[int, int, Relation]],
                       session_id: str | None = None) -> _Session | None:
        ds = _dataset(dataset_id)
        if ds is None:
            return None
        sid = session_id or uuid.uuid4().hex[:12]
        session = _Session(sid, dataset_id, ds, config, prefix,
                           session_path / f"{sid}.json")
        sessions[sid] = session
        session.advanced.clear()
        session.thread.start()
        session.advanced.wait(timeout=_ANSWER_TIMEOUT)
        return session

    # restore persisted sessions (deterministic replay of their answer logs)
    for file in sorted(session_path.glob("*.json")):
        try:
            saved = json.loads(file.read_text())
            prefix = [
                (int(a["i"]), int(a["j"]), Relation(a["relation"]))
                for a in saved.get("answers", [])
            ]
            _start_session(saved["dataset_id"], EngineConfig.from_dict(saved["config"]),
                           prefix, session_id=saved["session_id"])
        except Exception:
            continue

    @app.get("/datasets")
    def list_datasets():
        names = {p.stem for p in data_path.iterdir()
                 if p.is_file() and p.suffix in (".txt", ".csv", ".tsv")}
        names |= set(datasets)
        return {"datasets": sorted(names)}

    @app.post("/datasets")
    async def upload_dataset(request: Request):
        try:
            body = await request.json()
        except Exception:
            return _bad_request("body must be JSON")
        name = body.get("name")
        series = body.get("series")
        if not isinstance(name, str) or not name or not isinstance(series, list):
            return _bad_request("need 'name' and 'series'")
        labels = body.get("labels")
        try:
            ds = Dataset(np.asarray(series, dtype=np.float64),
                         tuple(labels) if labels else None, name=name)
        except (ValueError, TypeError) as err:
            return _bad_request(str(err))
        datasets[name] = ds
        save_ucr(ds, data_path / f"{name}.txt")
        return {"dataset_id": name, "n": ds.n, "m": ds.m}

    @app.post("/sessions")
    async def create_session(request: Request):
        try:
            body = await request.json()
        except Exception:
            return _bad_request("body must be JSON")
        dataset_id = body.get("dataset_id")
        if not isinstance(dataset_id, str):
            return _bad_request("need 'dataset_id'")
        try:
            config = EngineConfig.from_dict(body.get("config") or {})
        except (ValueError, TypeError, KeyError) as err:
            return _bad_request(f"bad config: {err}")
        session = _start_session(dataset_id, config, prefix=[])
        if session is None:
            return JSONResponse({"detail": f"unknown dataset {dataset_id!r}"}, status_code=404)
        return JSONResponse({"session_id": session.id}, status_code=201)

    def _session_or_none(session_id: str) -> _Session | None:
        return sessions.get(session_id)

    @app.get("/sessions/{session_id}/query")
    def get_query(session_id: str):
        session = _session_or_none(session_id)
        if session is None:
            return JSONResponse({"detail": "unknown session"}, status_code=404)
        return session.query_payload()

    @app.post("/sessions/{session_id}/answer")
    async def post_answer(session_id: str, request: Request):
        session = _session_or_none(session_id)
        if session is None:
            return JSONResponse({"detail": "unknown session"}, status_code=404)
        try:
            body = await request.json()
        except Exception:
            return _bad_request("body must be JSON")
        relation_text = body.get("relation")
        if relation_text not in ("must_link", "cannot_link"):
            return _bad_request("relation must be 'must_link' or 'cannot_link'")
        accepted = session.post_answer(Relation(relation_text))
        if not accepted:
            return JSONResponse({"detail": "no pending query"}, status_code=409)
        return session.query_payload()

    @app.get("/sessions/{session_id}/clustering")
    def get_clustering(session_id: str):
        session = _session_or_none(session_id)
        if session is None:
            return JSONResponse({"detail": "unknown session"}, status_code=404)
        return session.clustering_payload()

    @app.get("/sessions/{session_id}/log")
    def get_log(session_id: str):
        session = _session_or_none(session_id)
        if session is None:
            return JSONResponse({"detail": "unknown session"}, status_code=404)
        return session.log_payload()

    @app.delete("/sessions/{session_id}")
    def delete_session(session_id: str):
        session = _session_or_none(session_id)
        if session is None:
            return JSONResponse({"detail": "unknown session"}, status_code=404)
        session.abort()
        return {"phase": session.phase}

    console_dir = Path(__file__).resolve().parent.parent.parent / "frontend" / "dist"
    if console_dir.is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/console", StaticFiles(directory=str(console_dir), html=True),
                  name="console")

    return app
