import json
import os
import sqlite3
from datetime import datetime
from typing import Dict, List, Optional, Tuple
from data.defs import resolve_cache_path
from gasmix.core.error_handler import ErrorHandler
from gasmix.core.models.sweep_point import KEY_DECIMALS, SweepPoint


class DatabaseHandler:
    """
    A class used to manage the on-disk cache of interface sweep results.

    Each grid point of a sweep is stored once, keyed by sweep kind, scenario
    hash and rounded grid coordinates, so an interrupted sweep can resume
    where it stopped. Only the process aggregating results writes to the
    database.

    Attributes
    ----------
    db_path : str
        The file path to the SQLite database file (e.g., 'data/sweep_cache.db').
    error_handler : ErrorHandler
        An instance of the `ErrorHandler` class, used for logging any errors
        that occur during database operations.

    Methods
    -------
    cache_point(point)
        Inserts or replaces one sweep point.
    get_cached_point(kind, scenario_hash, omega, kappa)
        Retrieves one sweep point, if cached.
    get_cached_points(kind, scenario_hash)
        Retrieves every cached point of a sweep, keyed by (omega, kappa).
    clear(kind, scenario_hash)
        Removes cached points.
    """

    def __init__(self, db_path: str = None, error_handler: ErrorHandler = None):
        """
        Initialize the database handler.

        Args:
            db_path: Path to SQLite database file; the cache directory setting when omitted
            error_handler: ErrorHandler instance for logging
        """
        self.db_path = db_path or resolve_cache_path()
        self.error_handler = error_handler or ErrorHandler()
        self._initialize_database()

    def _initialize_database(self) -> None:
        """Create the sweep table if it doesn't exist."""
        try:
            directory = os.path.dirname(self.db_path)
            if directory:
                os.makedirs(directory, exist_ok=True)
            with sqlite3.connect(self.db_path) as conn:
                cursor = conn.cursor()
                cursor.execute("""
                CREATE TABLE IF NOT EXISTS sweep_points (
                    kind TEXT NOT NULL,
                    scenario_hash TEXT NOT NULL,
                    omega REAL NOT NULL,
                    kappa REAL NOT NULL,
                    status TEXT NOT NULL,
                    payload TEXT NOT NULL,
                    created DATETIME NOT NULL,
                    PRIMARY KEY (kind, scenario_hash, omega, kappa)
                )
                """)
                conn.commit()

        except Exception as e:
            self.error_handler.log_error(e, "initializing database", raise_exception=True)

    def cache_point(self, point: SweepPoint) -> bool:
        """
        Cache a sweep point in the database.

        Args:
            point: SweepPoint to cache

        Returns:
            bool: True if successful, False otherwise
        """
        try:
            with sqlite3.connect(self.db_path) as conn:
                cursor = conn.cursor()
                cursor.execute("""
                INSERT OR REPLACE INTO sweep_points
                (kind, scenario_hash, omega, kappa, status, payload, created)
                VALUES (?, ?, ?, ?, ?, ?, ?)
                """, (
                    point.kind,
                    point.scenario_hash,
                    round(point.omega, KEY_DECIMALS),
                    round(point.kappa, KEY_DECIMALS),
                    point.status,
                    json.dumps({"value": point.value, "message": point.message}, sort_keys=True),
                    point.created.isoformat(),
                ))
                conn.commit()
                return True

        except Exception as e:
            self.error_handler.log_error(e, "caching sweep point")
            return False

    @staticmethod
    def _to_point(row: Tuple) -> SweepPoint:
        kind, scenario_hash, omega, kappa, status, payload, created = row
        data = json.loads(payload)
        return SweepPoint(
            kind=kind,
            scenario_hash=scenario_hash,
            omega=omega,
            kappa=kappa,
            status=status,
            value=data.get("value"),
            message=data.get("message"),
            created=datetime.fromisoformat(created),
        )

    def get_cached_point(self, kind: str, scenario_hash: str, omega: float, kappa: float) -> Optional[SweepPoint]:
        """
        Retrieve a cached sweep point.

        Returns:
            Optional[SweepPoint]: The cached point if found, None otherwise
        """
        try:
            with sqlite3.connect(self.db_path) as conn:
                cursor = conn.cursor()
                cursor.execute("""
                SELECT kind, scenario_hash, omega, kappa, status, payload, created
                FROM sweep_points
                WHERE kind = ? AND scenario_hash = ? AND omega = ? AND kappa = ?
                """, (kind, scenario_hash, round(omega, KEY_DECIMALS), round(kappa, KEY_DECIMALS)))
                row = cursor.fetchone()
                return self._to_point(row) if row else None

        except Exception as e:
            self.error_handler.log_error(e, "retrieving cached sweep point")
            return None

    def get_cached_points(self, kind: str, scenario_hash: str) -> Dict[Tuple[float, float], SweepPoint]:
        """Every cached point of one sweep, keyed by rounded (omega, kappa)."""
        try:
            with sqlite3.connect(self.db_path) as conn:
                cursor = conn.cursor()
                cursor.execute("""
                SELECT kind, scenario_hash, omega, kappa, status, payload, created
                FROM sweep_points
                WHERE kind = ? AND scenario_hash = ?
                ORDER BY omega, kappa
                """, (kind, scenario_hash))
                points: List[SweepPoint] = [self._to_point(row) for row in cursor.fetchall()]
                return {(p.omega, p.kappa): p for p in points}

        except Exception as e:
            self.error_handler.log_error(e, "retrieving cached sweep points")
            return {}

    def clear(self, kind: Optional[str] = None, scenario_hash: Optional[str] = None) -> int:
        """Delete cached points, optionally restricted to one kind and hash; returns the count."""
        clauses, params = [], []
        if kind is not None:
            clauses.append("kind = ?")
            params.append(kind)
        if scenario_hash is not None:
            clauses.append("scenario_hash = ?")
            params.append(scenario_hash)
        where = f" WHERE {' AND '.join(clauses)}" if clauses else ""
        try:
            with sqlite3.connect(self.db_path) as conn:
                cursor = conn.cursor()
                cursor.execute(f"DELETE FROM sweep_points{where}", params)
                conn.commit()
                return cursor.rowcount

        except Exception as e:
            self.error_handler.log_error(e, "clearing sweep cache")
            return 0
