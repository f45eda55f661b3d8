import hashlib
import json
import sqlite3
from datetime import datetime, timezone
from typing import Optional, Tuple

from .config import DB_PATH
from .instances import OPT_PROVENANCE, InstanceSpec


def text_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def instance_fingerprint(spec: InstanceSpec) -> str:
    """Hash of the canonical problem content (name and cached optimum excluded)."""
    canonical = json.dumps(
        {"n": spec.n, "objective": spec.objective, "constraint": spec.constraint},
        sort_keys=True,
        separators=(",", ":"),
    )
    return text_hash(canonical)


class Storage:
    """SQLite cache of brute-force optima keyed by instance fingerprint."""

    def __init__(self, db_path: Optional[str] = None):
        self.db_path = db_path or DB_PATH
        self.conn = sqlite3.connect(self.db_path, check_same_thread=False)
        self._ensure_tables()

    def _ensure_tables(self):
        c = self.conn.cursor()
        c.execute(
            """
            CREATE TABLE IF NOT EXISTS opt_values (
                fingerprint TEXT PRIMARY KEY,
                instance TEXT,
                n INTEGER,
                value REAL,
                solution JSON,
                provenance TEXT,
                computed_at TEXT
            )
            """
        )
        self.conn.commit()

    def get_opt(self, fingerprint: str) -> Optional[Tuple[float, Tuple[int, ...]]]:
        c = self.conn.cursor()
        c.execute(
            "SELECT value, solution FROM opt_values WHERE fingerprint = ? AND provenance = ? LIMIT 1",
            (fingerprint, OPT_PROVENANCE),
        )
        row = c.fetchone()
        if row is None:
            return None
        return row[0], tuple(json.loads(row[1]))

    def put_opt(self, fingerprint: str, instance: str, n: int, value: float, solution):
        c = self.conn.cursor()
        c.execute(
            "INSERT OR IGNORE INTO opt_values (fingerprint, instance, n, value, solution, provenance, computed_at) "
            "VALUES (?,?,?,?,?,?,?)",
            (
                fingerprint,
                instance,
                n,
                float(value),
                json.dumps(sorted(solution)),
                OPT_PROVENANCE,
                datetime.now(timezone.utc).isoformat(),
            ),
        )
        self.conn.commit()

    def close(self):
        try:
            self.conn.close()
        except Exception:
            pass
