"""JSON persistence for key material produced by the setup command.

One store directory holds one round's keys: config.json, server.json and a
client_XXX.json per client.  Values are hex; files are written with sorted
keys and no volatile fields, so a rerun from the same seed reproduces them
byte for byte.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Dict, Tuple

from .encoding import FixedPointParams
from .errors import DeserializationError
from .group import GroupElement, scalar_from_bytes, scalar_to_bytes
from .protocol import ClientKeyMaterial, ServerKeyMaterial
from .secagg import SAClientState, SAParams, SAServerState
from .shamir import ShamirShare
from .threshold import SignerKeys

CONFIG_FILE = "config.json"
SERVER_FILE = "server.json"


def _scalar_hex(value: int) -> str:
    return scalar_to_bytes(value).hex()


def _scalar_unhex(text: str) -> int:
    return scalar_from_bytes(bytes.fromhex(text))


def _element_hex(point: GroupElement) -> str:
    return point.to_bytes().hex()


def _element_unhex(text: str) -> GroupElement:
    return GroupElement.from_bytes(bytes.fromhex(text))


def _share_doc(share: ShamirShare) -> list:
    return [share.index, _scalar_hex(share.value)]


def _share_undoc(doc: list) -> ShamirShare:
    return ShamirShare(int(doc[0]), _scalar_unhex(doc[1]))


def _params_doc(params: SAParams) -> dict:
    return {
        "n": params.n,
        "degree": params.degree,
        "t_sa": params.t_sa,
        "dimension": params.dimension,
        "fractional_bits": params.fixed_point.fractional_bits,
        "clamp": params.fixed_point.clamp,
    }


def _params_undoc(doc: dict) -> SAParams:
    return SAParams(
        n=int(doc["n"]),
        degree=int(doc["degree"]),
        t_sa=int(doc["t_sa"]),
        dimension=int(doc["dimension"]),
        fixed_point=FixedPointParams(int(doc["fractional_bits"]), float(doc["clamp"])),
    )


def client_file(index: int) -> str:
    return f"client_{index:03d}.json"


def save_store(
    directory: Path,
    clients: Dict[int, ClientKeyMaterial],
    server: ServerKeyMaterial,
    config: dict,
) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / CONFIG_FILE).write_text(json.dumps(config, sort_keys=True, indent=2) + "\n")
    server_doc = {
        "n": server.n,
        "n_drop": server.n_drop,
        "threshold": server.threshold,
        "params": _params_doc(server.params),
        "group_key": _element_hex(server.group_key),
        "verification_shares": {
            str(i): _element_hex(v) for i, v in server.verification_shares.items()
        },
        "publics": {str(i): _element_hex(p) for i, p in server.sa.publics.items()},
        "graph": {str(i): list(nbrs) for i, nbrs in server.sa.graph.items()},
    }
    (directory / SERVER_FILE).write_text(
        json.dumps(server_doc, sort_keys=True, indent=2) + "\n"
    )
    for index, material in sorted(clients.items()):
        sa = material.sa
        doc = {
            "index": index,
            "signer": {
                "signing_share": _scalar_hex(material.signer.signing_share),
                "verification_share": _element_hex(material.signer.verification_share),
                "group_key": _element_hex(material.signer.group_key),
                "threshold": material.signer.threshold,
                "signer_count": material.signer.signer_count,
            },
            "sa": {
                "dh_secret": _scalar_hex(sa.dh_secret),
                "dh_public": _element_hex(sa.dh_public),
                "self_seed": _scalar_hex(sa.self_seed),
                "neighbor_publics": {
                    str(j): _element_hex(p) for j, p in sa.neighbor_publics.items()
                },
                "held_b_shares": {
                    str(o): _share_doc(s) for o, s in sa.held_b_shares.items()
                },
                "held_k_shares": {
                    str(o): _share_doc(s) for o, s in sa.held_k_shares.items()
                },
            },
        }
        (directory / client_file(index)).write_text(
            json.dumps(doc, sort_keys=True, indent=2) + "\n"
        )


def load_store(directory: Path) -> Tuple[Dict[int, ClientKeyMaterial], ServerKeyMaterial, dict]:
    directory = Path(directory)
    try:
        config = json.loads((directory / CONFIG_FILE).read_text())
        server_doc = json.loads((directory / SERVER_FILE).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DeserializationError(f"cannot load store: {exc}") from exc
    params = _params_undoc(server_doc["params"])
    sa_server = SAServerState(
        params=params,
        publics={int(i): _element_unhex(p) for i, p in server_doc["publics"].items()},
        graph={int(i): tuple(nbrs) for i, nbrs in server_doc["graph"].items()},
    )
    server = ServerKeyMaterial(
        n=int(server_doc["n"]),
        n_drop=int(server_doc["n_drop"]),
        threshold=int(server_doc["threshold"]),
        params=params,
        sa=sa_server,
        group_key=_element_unhex(server_doc["group_key"]),
        verification_shares={
            int(i): _element_unhex(v)
            for i, v in server_doc["verification_shares"].items()
        },
    )
    clients: Dict[int, ClientKeyMaterial] = {}
    for index in sorted(sa_server.graph):
        path = directory / client_file(index)
        try:
            doc = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise DeserializationError(f"cannot load {path.name}: {exc}") from exc
        signer_doc = doc["signer"]
        signer = SignerKeys(
            index=index,
            signing_share=_scalar_unhex(signer_doc["signing_share"]),
            verification_share=_element_unhex(signer_doc["verification_share"]),
            group_key=_element_unhex(signer_doc["group_key"]),
            threshold=int(signer_doc["threshold"]),
            signer_count=int(signer_doc["signer_count"]),
        )
        sa_doc = doc["sa"]
        sa = SAClientState(
            index=index,
            params=params,
            dh_secret=_scalar_unhex(sa_doc["dh_secret"]),
            dh_public=_element_unhex(sa_doc["dh_public"]),
            self_seed=_scalar_unhex(sa_doc["self_seed"]),
            neighbor_publics={
                int(j): _element_unhex(p) for j, p in sa_doc["neighbor_publics"].items()
            },
            held_b_shares={
                int(o): _share_undoc(s) for o, s in sa_doc["held_b_shares"].items()
            },
            held_k_shares={
                int(o): _share_undoc(s) for o, s in sa_doc["held_k_shares"].items()
            },
        )
        clients[index] = ClientKeyMaterial(index=index, sa=sa, signer=signer)
    return clients, server, config
