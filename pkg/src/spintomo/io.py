"""File formats: density matrices, record streams and estimates.

Density matrices travel as JSON {dim, basis, re, im}; record streams as
CSV (one record per line) or JSON; estimates as JSON with separate real,
imaginary and error layers.  All files are UTF-8.
"""

import csv
import json

import numpy as np

from . import spincore as sc
from .reconstruct import ReconstructionEstimate
from .simulate import CoupledRecords, MultiRecords, SingleRecords

SCHEMA_VERSION = 1


def _f(x):
    return repr(float(x))


class RecordFormatError(Exception):
    """Malformed record file; carries the offending line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def density_matrix_to_dict(rho):
    mat = rho.matrix if isinstance(rho, sc.DensityMatrix) else np.asarray(rho)
    labels = list(rho.basis_labels) if isinstance(rho, sc.DensityMatrix) else None
    return {
        "schema_version": SCHEMA_VERSION,
        "dim": int(mat.shape[0]),
        "basis": labels,
        "re": np.real(mat).tolist(),
        "im": np.imag(mat).tolist(),
    }


def density_matrix_from_dict(data):
    mat = np.array(data["re"], dtype=float) + 1j * np.array(data["im"], dtype=float)
    if mat.shape != (data["dim"], data["dim"]):
        raise ValueError("matrix shape does not match declared dim")
    basis = data.get("basis")
    labels = tuple(tuple(b) if isinstance(b, list) else b for b in basis) if basis else None
    return sc.DensityMatrix(mat, labels)


def save_density_matrix(rho, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(density_matrix_to_dict(rho), fh, indent=1)


def load_density_matrix(path):
    with open(path, encoding="utf-8") as fh:
        return density_matrix_from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# record streams


def _single_header(two_s):
    return ["theta", "phi", "m"], {"mode": "single", "two_s": two_s}


def write_records_csv(records, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if isinstance(records, SingleRecords):
            writer.writerow([f"# mode=single two_s={records.two_s}"])
            writer.writerow(["theta", "phi", "m"])
            for t, p, m in zip(records.thetas, records.phis, records.m):
                writer.writerow([_f(t), _f(p), _f(m)])
        elif isinstance(records, MultiRecords):
            two_s_txt = ",".join(str(s) for s in records.two_s_list)
            writer.writerow([f"# mode=distinguishable two_s={two_s_txt}"])
            header = []
            for k in range(records.num_particles):
                header += [f"theta_{k}", f"phi_{k}", f"m_{k}"]
            writer.writerow(header)
            for i in range(len(records)):
                row = []
                for k in range(records.num_particles):
                    row += [_f(records.thetas[i, k]), _f(records.phis[i, k]),
                            _f(records.m[i, k])]
                writer.writerow(row)
        elif isinstance(records, CoupledRecords):
            writer.writerow([f"# mode=indistinguishable num_spins={records.num_spins}"])
            writer.writerow(["theta", "phi", "S", "M"])
            for i in range(len(records)):
                writer.writerow([_f(records.thetas[i]), _f(records.phis[i]),
                                 _f(records.total_S[i]), _f(records.total_M[i])])
        else:
            raise TypeError(f"unsupported record type {type(records).__name__}")


def write_records_json(records, path):
    if isinstance(records, SingleRecords):
        data = {"mode": "single", "two_s": records.two_s,
                "theta": records.thetas.tolist(), "phi": records.phis.tolist(),
                "m": records.m.tolist()}
    elif isinstance(records, MultiRecords):
        data = {"mode": "distinguishable",
                "two_s_list": list(records.two_s_list),
                "theta": records.thetas.tolist(), "phi": records.phis.tolist(),
                "m": records.m.tolist()}
    elif isinstance(records, CoupledRecords):
        data = {"mode": "indistinguishable", "num_spins": records.num_spins,
                "theta": records.thetas.tolist(), "phi": records.phis.tolist(),
                "S": records.total_S.tolist(), "M": records.total_M.tolist()}
    else:
        raise TypeError(f"unsupported record type {type(records).__name__}")
    data["schema_version"] = SCHEMA_VERSION
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh)


def _parse_metadata(line):
    meta = {}
    for token in line.lstrip("#").split():
        key, _, value = token.partition("=")
        meta[key] = value
    return meta


def read_records(path):
    """Read a record stream, auto-detecting JSON vs CSV."""
    with open(path, encoding="utf-8") as fh:
        first = fh.read(1)
    if first == "{":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        mode = data["mode"]
        if mode == "single":
            return SingleRecords(int(data["two_s"]), np.array(data["theta"]),
                                 np.array(data["phi"]), np.array(data["m"]))
        if mode == "distinguishable":
            return MultiRecords(tuple(data["two_s_list"]),
                                np.array(data["theta"]), np.array(data["phi"]),
                                np.array(data["m"]))
        if mode == "indistinguishable":
            return CoupledRecords(int(data["num_spins"]),
                                  np.array(data["theta"]), np.array(data["phi"]),
                                  np.array(data["S"]), np.array(data["M"]))
        raise RecordFormatError(f"unknown mode {mode!r}")
    return _read_records_csv(path)


def _read_records_csv(path):
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    head = lines[0].strip().strip('"') if lines else ""
    if not head.startswith("#"):
        raise RecordFormatError("missing metadata line", line=1)
    meta = _parse_metadata(head)
    mode = meta.get("mode")
    rows = []
    for lineno, line in enumerate(lines[2:], start=3):
        if not line.strip():
            continue
        try:
            rows.append([float(tok) for tok in line.split(",")])
        except ValueError as exc:
            raise RecordFormatError(str(exc), line=lineno) from exc
    if mode == "single":
        two_s = int(meta["two_s"])
        try:
            arr = np.array(rows, dtype=float).reshape(len(rows), 3)
        except ValueError as exc:
            raise RecordFormatError("expected theta,phi,m columns") from exc
        return SingleRecords(two_s, arr[:, 0], arr[:, 1], arr[:, 2])
    if mode == "distinguishable":
        two_s_list = tuple(int(t) for t in meta["two_s"].split(","))
        k = len(two_s_list)
        try:
            arr = np.array(rows, dtype=float).reshape(len(rows), 3 * k)
        except ValueError as exc:
            raise RecordFormatError("wrong column count for particle list") from exc
        return MultiRecords(two_s_list, arr[:, 0::3], arr[:, 1::3], arr[:, 2::3])
    if mode == "indistinguishable":
        num_spins = int(meta["num_spins"])
        try:
            arr = np.array(rows, dtype=float).reshape(len(rows), 4)
        except ValueError as exc:
            raise RecordFormatError("expected theta,phi,S,M columns") from exc
        return CoupledRecords(num_spins, arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3])
    raise RecordFormatError(f"unknown mode {mode!r}", line=1)


# ---------------------------------------------------------------------------
# estimates


def estimate_to_dict(estimate):
    if estimate.block_means is not None:
        nb = estimate.block_means.shape[0]
        err_re = (np.real(estimate.block_means).std(axis=0, ddof=1)
                  / np.sqrt(nb)).tolist()
        err_im = (np.imag(estimate.block_means).std(axis=0, ddof=1)
                  / np.sqrt(nb)).tolist()
    else:
        err_re = err_im = estimate.std_error.tolist()
    return {
        "schema_version": SCHEMA_VERSION,
        "scheme": estimate.scheme,
        "num_samples": int(estimate.num_samples),
        "num_blocks": int(estimate.num_blocks),
        "basis": [list(b) if isinstance(b, tuple) else b
                  for b in estimate.basis_labels],
        "re": np.real(estimate.matrix).tolist(),
        "im": np.imag(estimate.matrix).tolist(),
        "err_re": err_re,
        "err_im": err_im,
    }


def write_estimate(estimate, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(estimate_to_dict(estimate), fh, indent=1)


def estimate_from_dict(data):
    mat = np.array(data["re"]) + 1j * np.array(data["im"])
    basis = tuple(tuple(b) if isinstance(b, list) else b for b in data["basis"])
    return ReconstructionEstimate(
        matrix=mat, std_error=np.array(data["err_re"]),
        num_samples=data["num_samples"], num_blocks=data["num_blocks"],
        scheme=data["scheme"], basis_labels=basis)


def write_diagonal_csv(estimate, path, theory=None):
    """Plot-ready diagonal profile: index, value, std error and optionally
    the theoretical value."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        header = ["index", "label", "value", "std_error"]
        if theory is not None:
            header.append("theory")
        writer.writerow(header)
        diag = np.diag(estimate.matrix).real
        err = np.diag(estimate.std_error)
        for i in range(estimate.dim):
            row = [i, estimate.basis_labels[i], _f(diag[i]), _f(err[i])]
            if theory is not None:
                row.append(_f(theory[i]))
            writer.writerow(row)
