# src/solver/census_store.py
import json
import os
import sqlite3
from typing import Any, Dict

import pandas as pd

CENSUS_COLUMNS = ("kind", "states", "agents", "actions", "table_size", "eve_states", "adam_states")


class CensusStore:
    """sqlite file holding arena-size samples and recorded decision disagreements."""

    def __init__(self, db_path="data/census.db"):
        folder = os.path.dirname(db_path)
        if folder:
            os.makedirs(folder, exist_ok=True)
        self.conn = sqlite3.connect(db_path, check_same_thread=False)
        self._ensure_tables()

    def _ensure_tables(self):
        cur = self.conn.cursor()
        cur.execute("""
            CREATE TABLE IF NOT EXISTS census (
                id INTEGER PRIMARY KEY AUTOINCREMENT,
                kind TEXT,
                states INTEGER,
                agents INTEGER,
                actions INTEGER,
                table_size INTEGER,
                eve_states INTEGER,
                adam_states INTEGER
            )
        """)
        cur.execute("""
            CREATE TABLE IF NOT EXISTS disagreements (
                id INTEGER PRIMARY KEY AUTOINCREMENT,
                kind TEXT,
                game TEXT,
                detail TEXT
            )
        """)
        self.conn.commit()

    def insert_census(self, record: Dict[str, Any]) -> int:
        cur = self.conn.cursor()
        cur.execute(
            f"INSERT INTO census ({', '.join(CENSUS_COLUMNS)}) VALUES ({', '.join('?' * len(CENSUS_COLUMNS))})",
            tuple(record[c] for c in CENSUS_COLUMNS),
        )
        self.conn.commit()
        return cur.lastrowid

    def load_census(self) -> pd.DataFrame:
        return pd.read_sql_query(f"SELECT {', '.join(CENSUS_COLUMNS)} FROM census ORDER BY id", self.conn)

    def insert_disagreement(self, kind: str, game_document: Dict[str, Any], detail: Dict[str, Any]) -> int:
        cur = self.conn.cursor()
        cur.execute(
            "INSERT INTO disagreements (kind, game, detail) VALUES (?,?,?)",
            (kind, json.dumps(game_document, sort_keys=True), json.dumps(detail, sort_keys=True)),
        )
        self.conn.commit()
        return cur.lastrowid

    def load_disagreements(self):
        cur = self.conn.cursor()
        rows = cur.execute("SELECT id, kind, game, detail FROM disagreements ORDER BY id").fetchall()
        return [{"id": r[0], "kind": r[1], "game": json.loads(r[2]), "detail": json.loads(r[3])} for r in rows]

    def close(self):
        self.conn.close()
