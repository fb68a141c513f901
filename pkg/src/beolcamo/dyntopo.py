"""Incremental topological order (Pearce and Kelly, 2006).

Used to keep the union of all candidate connections acyclic while dummy
sources are being chosen: an edge insertion is accepted only if the graph
stays a DAG.  Since every resolved netlist is a subgraph of that union,
accepting edges this way guarantees acyclicity under every assignment.
"""
from __future__ import annotations

from .netlist import Netlist, topo_order


class DynamicTopoOrder:
    def __init__(self, n_nodes: int = 0):
        self.ord: list[int] = list(range(n_nodes))
        self.succ: list[list[int]] = [[] for _ in range(n_nodes)]
        self.pred: list[list[int]] = [[] for _ in range(n_nodes)]
        self._low = 0

    @classmethod
    def from_netlist(cls, netlist: Netlist) -> "DynamicTopoOrder":
        """Net graph of ``netlist``: one node per net, an edge per gate pin."""
        n = netlist.n_nets
        dt = cls(n)
        pos = 0
        for nid in range(n):
            if netlist.net_driver[nid] < 0:
                dt.ord[nid] = pos
                pos += 1
        for gid in topo_order(netlist):
            g = netlist.gates[gid]
            dt.ord[g.output] = pos
            pos += 1
            for i in g.inputs:
                dt.succ[i].append(g.output)
                dt.pred[g.output].append(i)
        return dt

    def add_node(self) -> int:
        """New isolated node, ordered before all existing nodes."""
        self._low -= 1
        self.ord.append(self._low)
        self.succ.append([])
        self.pred.append([])
        return len(self.ord) - 1

    def reaches(self, src: int, dst: int) -> bool:
        """Whether ``dst`` is reachable from ``src`` (bounded by the order)."""
        if src == dst:
            return True
        ub = self.ord[dst]
        if self.ord[src] > ub:
            return False
        seen = {src}
        stack = [src]
        ordv = self.ord
        while stack:
            w = stack.pop()
            for x in self.succ[w]:
                if x == dst:
                    return True
                if x not in seen and ordv[x] < ub:
                    seen.add(x)
                    stack.append(x)
        return False

    def try_add_edge(self, u: int, v: int) -> bool:
        """Insert ``u -> v`` unless it closes a cycle; returns acceptance."""
        if u == v:
            return False
        ordv = self.ord
        lb, ub = ordv[v], ordv[u]
        if lb > ub:
            self.succ[u].append(v)
            self.pred[v].append(u)
            return True
        # forward from v within (lb, ub]
        fwd = []
        seen = {v}
        stack = [v]
        while stack:
            w = stack.pop()
            fwd.append(w)
            for x in self.succ[w]:
                if x == u:
                    return False
                if x not in seen and ordv[x] < ub:
                    seen.add(x)
                    stack.append(x)
        back = []
        seen_b = {u}
        stack = [u]
        while stack:
            w = stack.pop()
            back.append(w)
            for x in self.pred[w]:
                if x not in seen_b and ordv[x] > lb:
                    seen_b.add(x)
                    stack.append(x)
        back.sort(key=ordv.__getitem__)
        fwd.sort(key=ordv.__getitem__)
        slots = sorted(ordv[w] for w in back + fwd)
        for w, o in zip(back + fwd, slots):
            ordv[w] = o
        self.succ[u].append(v)
        self.pred[v].append(u)
        return True
