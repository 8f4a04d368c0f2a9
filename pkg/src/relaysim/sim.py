"""Discrete-event engine binding scenario, channel, relay, link, MAC and traffic.

The event loop owns all mutable state: packet arrivals, TDMA slots, and
channel-expiry events that regenerate realizations and re-run the codebook
sweep.  A master seed feeds labeled per-subsystem streams, so channel draws,
L2SM draws, and any future randomness are mutually isolated.
"""
from __future__ import annotations

import heapq
import itertools
import json
import math
import time as _time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .antenna import ArrayGeometry, Codebook, PATTERNS, angles_of, build_codebook
from .channel import (ChannelRealization, apply_channel_overrides, assemble_channel,
                      draw_clusters, path_loss_db, resolve_env)
from .geometry import (Node, RelaySpec, blockage_loss_db, distance_3d,
                       load_scenario, los_state)
from .link import (LongTermMatrix, Psd, SinrReport, SubbandGrid, SweepResult,
                   attenuate, direct_psd, effective_sinr, long_term, make_report,
                   sinr_per_subband, small_scale_psd, sweep, sweep_direct)
from .mac import (L2smTable, McsEntry, NO_TRANSMISSION, SlotClock, TransportBlock,
                  arq_on_failure, default_mcs_table, load_mcs_csv, schedule,
                  tb_error, tb_size_bytes, validate_mcs_table)
from .relay import (RelayConfigMatrix, RelayNoise, af_relayed_noise_power,
                    relay_codebook)
from .traffic import (CbrSource, FlowQueue, MetricsSummary, Packet, PacketStatus,
                      SinrTrace, UeMetrics, enqueue, generate_arrivals,
                      latency_mean_s, latency_p95_s, per, throughput_bps)
from .util import ConfigError, InvariantError, dbm_to_watt, db_to_lin, derived_rng

THERMAL_NOISE_DBM_HZ = -174.0

_LINK_CODES = {"SR": 0, "RD": 1, "SD": 2}


@dataclass(frozen=True)
class RunConfig:
    """Fully describes one simulation run; (config, seed) determines every output."""

    scenario_path: str
    relay_override: str | None = None       # "irs:60x120" | "af:16x16:40" | "none"
    duration_s: float = 2.0
    seed: int = 42
    out_dir: str | None = None
    trace_packets: bool = False
    traffic_rate_bps: float | None = None
    packet_bytes: int = 1500
    queue_capacity_bytes: int = 5_000_000
    n_subbands: int = 50
    overhead_frac: float = 0.2
    max_retx: int = 3
    slot_duration_s: float = 125e-6
    ue_noise_figure_db: float = 9.0
    relay_noise_figure_db: float = 5.0
    codebook_oversampling: int = 2
    l2sm_path: str | None = None
    mcs_path: str | None = None

    def __post_init__(self):
        if self.duration_s <= 0:
            raise ConfigError("duration must be positive")


def parse_relay_override(text: str) -> RelaySpec | None:
    """Parse "irs:60x120", "af:16x16:40", or "none" (H x V element counts)."""
    parts = text.lower().split(":")
    if parts == ["none"]:
        return None
    try:
        kind = parts[0]
        cols_h, rows_v = (int(x) for x in parts[1].split("x"))
        gain = float(parts[2]) if len(parts) > 2 else (40.0 if kind == "af" else 0.0)
        return RelaySpec(kind=kind, rows_v=rows_v, cols_h=cols_h, amp_gain_db=gain)
    except (IndexError, ValueError) as exc:
        raise ConfigError(f"bad relay spec {text!r}: {exc}")


@dataclass
class _UeLink:
    """Per-UE mutable link state, refreshed at channel-expiry events."""

    node: Node
    geom: ArrayGeometry
    codebook: Codebook
    phi_codebook: list[RelayConfigMatrix] | None
    pl_rd_base: float = 0.0
    pl_sd_base: float = 0.0
    pl_rd_db: float = 0.0
    pl_sd_db: float = 0.0
    blockage_db: float = 0.0
    d_rd_m: float = 0.0
    d_sd_m: float = 0.0
    env_sd_los: bool = False
    # refreshed per epoch
    h_sr: ChannelRealization | None = None
    h_rd: ChannelRealization | None = None
    h_sd: ChannelRealization | None = None
    sweep: SweepResult | None = None
    lt: LongTermMatrix | None = None
    af_noise_at_ue_w: float = 0.0
    report_cache: SinrReport | None = None
    # MAC state
    queue: FlowQueue = None
    pending_tb: TransportBlock | None = None


@dataclass
class RunResult:
    summary: MetricsSummary
    trace: SinrTrace
    packets: list[Packet]
    meta: dict
    sweep_log: list[tuple[int, int, float]]  # (epoch, ue, predicted SINR dB)

    @property
    def per_ue(self):
        return self.summary.per_ue


class _Engine:
    def __init__(self, config: RunConfig):
        self.cfg = config
        self.scenario = load_scenario(config.scenario_path)
        self.relay_spec = self.scenario.relay
        if config.relay_override is not None:
            self.relay_spec = parse_relay_override(config.relay_override)
        self.relay_node = self.scenario.relay_node
        if self.relay_spec is not None and self.relay_node is None:
            raise ConfigError("relay configuration given but the scenario has no RELAY node")
        self.relayed = self.relay_spec is not None and self.relay_node is not None

        self._setup_radio()
        self._setup_links()
        self._setup_mac()

    # ---------------------------------------------------------------- setup
    def _orientation(self, node: Node, target: np.ndarray) -> tuple[float, float]:
        if node.array.orientation_deg is not None:
            az, zen = node.array.orientation_deg
            return math.radians(az), math.radians(zen)
        return angles_of(target - node.position)

    def _geom(self, node: Node, target: np.ndarray,
              rows_v: int | None = None, cols_h: int | None = None) -> ArrayGeometry:
        az, zen = self._orientation(node, target)
        return ArrayGeometry(
            rows_v=rows_v if rows_v is not None else node.array.rows_v,
            cols_h=cols_h if cols_h is not None else node.array.cols_h,
            spacing_wl=node.array.spacing_wl,
            boresight_az=az, boresight_zen=zen,
        )

    def _setup_radio(self):
        sc = self.scenario
        cfg = self.cfg
        self.grid = SubbandGrid.for_bandwidth(sc.bandwidth_hz, cfg.n_subbands)
        self.p_tx_w = dbm_to_watt(sc.gnb.tx_power_dbm)
        self.tx_psd = Psd.flat(self.grid, self.p_tx_w / sc.bandwidth_hz)
        noise_psd_w_hz = dbm_to_watt(THERMAL_NOISE_DBM_HZ + cfg.ue_noise_figure_db)
        self.noise_psd = Psd.flat(self.grid, noise_psd_w_hz)
        self.noise_total_w = noise_psd_w_hz * sc.bandwidth_hz
        self.relay_sigma2_w = dbm_to_watt(
            THERMAL_NOISE_DBM_HZ + 10.0 * math.log10(sc.bandwidth_hz)
            + cfg.relay_noise_figure_db)

        self.env_los = resolve_env("uma_los")
        self.env_nlos = resolve_env("uma_nlos")
        self.prof_los = apply_channel_overrides(self.env_los.clusters, sc.channel_overrides)
        self.prof_nlos = apply_channel_overrides(self.env_nlos.clusters, sc.channel_overrides)
        self.coherence_s = self.prof_los.coherence_s
        self.fc_ghz = sc.carrier_hz / 1e9

    def _setup_links(self):
        sc = self.scenario
        cfg = self.cfg
        gnb = sc.gnb
        ues = sc.ues
        if not ues:
            raise ConfigError("scenario has no UE nodes")
        centroid = np.mean([u.position for u in ues], axis=0)

        if self.relayed:
            rnode = self.relay_node
            gnb_target = rnode.position
            to_gnb = gnb.position - rnode.position
            to_ues = centroid - rnode.position
            bisector = to_gnb / np.linalg.norm(to_gnb) + to_ues / np.linalg.norm(to_ues)
            if np.linalg.norm(bisector) < 1e-9:
                bisector = to_gnb
            raz, rzen = self._orientation(rnode, rnode.position + bisector)
            spec = self.relay_spec
            self.relay_geom = ArrayGeometry(
                rows_v=spec.rows_v, cols_h=spec.cols_h,
                spacing_wl=rnode.array.spacing_wl,
                boresight_az=raz, boresight_zen=rzen)
            self.d_sr_m = distance_3d(gnb, rnode)
            self._pl_sr_base = path_loss_db(self.d_sr_m, self.fc_ghz,
                                            self.env_los.path_loss)
            self.pl_sr_db = self._pl_sr_base
        else:
            gnb_target = centroid
            self.relay_geom = None
            self.d_sr_m = 0.0
            self._pl_sr_base = 0.0
            self.pl_sr_db = 0.0

        self.gnb_geom = self._geom(gnb, gnb_target)
        self.gnb_pattern = PATTERNS[gnb.array.pattern]
        ov = cfg.codebook_oversampling
        self.gnb_cb = build_codebook(self.gnb_geom, ov * self.gnb_geom.cols_h,
                                     ov * self.gnb_geom.rows_v)

        self.links: dict[int, _UeLink] = {}
        for ue in ues:
            target = self.relay_node.position if self.relayed else gnb.position
            geom = self._geom(ue, target)
            cb = build_codebook(geom, ov * geom.cols_h, ov * geom.rows_v)
            link = _UeLink(node=ue, geom=geom, codebook=cb, phi_codebook=None)
            link.queue = FlowQueue(cfg.queue_capacity_bytes)

            state_sd = los_state(sc, gnb, ue)
            link.blockage_db = blockage_loss_db(state_sd)
            link.d_sd_m = distance_3d(gnb, ue)
            env_sd = self.env_los if state_sd.is_los else self.env_nlos
            link.pl_sd_base = path_loss_db(link.d_sd_m, self.fc_ghz, env_sd.path_loss)
            link.pl_sd_db = link.pl_sd_base
            link.env_sd_los = state_sd.is_los

            if self.relayed:
                rnode = self.relay_node
                link.d_rd_m = distance_3d(rnode, ue)
                link.pl_rd_base = path_loss_db(link.d_rd_m, self.fc_ghz,
                                               self.env_los.path_loss)
                link.pl_rd_db = link.pl_rd_base
                in_center = angles_of(gnb.position - rnode.position)
                out_center = angles_of(ue.position - rnode.position)
                link.phi_codebook = relay_codebook(
                    self.relay_spec.kind, self.relay_geom,
                    self.relay_spec.codebook_n_in, self.relay_spec.codebook_n_out,
                    in_center=in_center, out_center=out_center,
                    amp_gain_db=self.relay_spec.amp_gain_db if self.relay_spec.kind == "af" else 0.0)
            self.links[ue.id] = link

    def _setup_mac(self):
        cfg = self.cfg
        self.mcs_table = (load_mcs_csv(cfg.mcs_path) if cfg.mcs_path
                          else validate_mcs_table(default_mcs_table()))
        self.l2sm = (L2smTable.from_csv(cfg.l2sm_path) if cfg.l2sm_path
                     else L2smTable.logistic(self.mcs_table))
        for entry in self.mcs_table:
            if entry.index not in self.l2sm.mcs_indices:
                raise ConfigError(f"L2SM table lacks a curve for MCS {entry.index}")
        self.mcs_by_index = {e.index: e for e in self.mcs_table}
        self.clock = SlotClock(slot_duration_s=cfg.slot_duration_s)
        self.rng_l2sm = derived_rng(cfg.seed, "l2sm")
        source = CbrSource(rate_bps=cfg.traffic_rate_bps or 50e6,
                           packet_bytes=cfg.packet_bytes)
        self.source = source

    # ------------------------------------------------------------- channels
    def _shadow_db(self, sigma: float, link_code: int, ue_id: int) -> float:
        if sigma <= 0.0:
            return 0.0
        rng = derived_rng(self.cfg.seed, "shadow", link_code, ue_id)
        return float(rng.normal(0.0, sigma))

    def _apply_shadowing(self):
        # one static draw per link per run; a no-op at the default sigma = 0
        sig_los = self.prof_los.shadow_sigma_db
        sig_nlos = self.prof_nlos.shadow_sigma_db
        if self.relayed:
            self.pl_sr_db = self._pl_sr_base + self._shadow_db(
                sig_los, _LINK_CODES["SR"], 0)
        for ue_id, link in self.links.items():
            sig_sd = sig_los if link.env_sd_los else sig_nlos
            link.pl_sd_db = link.pl_sd_base + self._shadow_db(
                sig_sd, _LINK_CODES["SD"], ue_id)
            if self.relayed:
                link.pl_rd_db = link.pl_rd_base + self._shadow_db(
                    sig_los, _LINK_CODES["RD"], ue_id)

    def _refresh_channels(self, epoch: int, now: float):
        sc = self.scenario
        gnb = sc.gnb
        coh = self.coherence_s
        if epoch == 0:
            self._apply_shadowing()
        if self.relayed:
            rnode = self.relay_node
            rng = derived_rng(self.cfg.seed, "channel", epoch, _LINK_CODES["SR"], 0)
            cl_sr = draw_clusters(rng, "SR", "uma_los",
                                  mean_aod=angles_of(rnode.position - gnb.position),
                                  mean_aoa=angles_of(gnb.position - rnode.position),
                                  profile=self.prof_los)
            h_sr = assemble_channel(cl_sr, self.gnb_geom, self.relay_geom, sc.carrier_hz,
                                    tx_pattern=self.gnb_pattern,
                                    generated_at=now, coherence_s=coh)
        for ue_id, link in self.links.items():
            ue = link.node
            ue_pattern = PATTERNS[ue.array.pattern]
            if self.relayed:
                rnode = self.relay_node
                rng = derived_rng(self.cfg.seed, "channel", epoch, _LINK_CODES["RD"], ue_id)
                cl_rd = draw_clusters(rng, "RD", "uma_los",
                                      mean_aod=angles_of(ue.position - rnode.position),
                                      mean_aoa=angles_of(rnode.position - ue.position),
                                      profile=self.prof_los)
                link.h_rd = assemble_channel(cl_rd, self.relay_geom, link.geom, sc.carrier_hz,
                                             rx_pattern=ue_pattern,
                                             generated_at=now, coherence_s=coh)
                pl_casc = self.pl_sr_db + link.pl_rd_db
                noise_param = self.noise_total_w * db_to_lin(pl_casc) / self.p_tx_w
                relay_noise = None
                if self.relay_spec.kind == "af":
                    relay_noise = RelayNoise(
                        sigma2_w=self.relay_sigma2_w * db_to_lin(self.pl_sr_db) / self.p_tx_w,
                        noise_figure_db=self.cfg.relay_noise_figure_db)
                res = sweep(self.gnb_cb, link.codebook, link.phi_codebook,
                            h_sr, link.h_rd, noise_param, relay_noise)
                link.sweep = res
                w_s = self.gnb_cb.codewords[res.w_s_idx]
                w_d = link.codebook.codewords[res.w_d_idx]
                phi = link.phi_codebook[res.phi_idx]
                link.lt = long_term(w_s, w_d, phi, h_sr, link.h_rd)
                link.h_sr = h_sr
                if self.relay_spec.kind == "af":
                    raw = af_relayed_noise_power(
                        w_d, link.h_rd, phi,
                        RelayNoise(sigma2_w=self.relay_sigma2_w,
                                   noise_figure_db=self.cfg.relay_noise_figure_db))
                    link.af_noise_at_ue_w = raw / db_to_lin(link.pl_rd_db)
                else:
                    link.af_noise_at_ue_w = 0.0
            else:
                rng = derived_rng(self.cfg.seed, "channel", epoch, _LINK_CODES["SD"], ue_id)
                profile = self.prof_los if link.env_sd_los else self.prof_nlos
                env_key = "uma_los" if link.env_sd_los else "uma_nlos"
                cl_sd = draw_clusters(rng, "SD", env_key,
                                      mean_aod=angles_of(ue.position - gnb.position),
                                      mean_aoa=angles_of(gnb.position - ue.position),
                                      profile=profile)
                link.h_sd = assemble_channel(cl_sd, self.gnb_geom, link.geom, sc.carrier_hz,
                                             tx_pattern=self.gnb_pattern,
                                             rx_pattern=PATTERNS[ue.array.pattern],
                                             generated_at=now, coherence_s=coh)
                pl = link.pl_sd_db + link.blockage_db
                noise_param = self.noise_total_w * db_to_lin(pl) / self.p_tx_w
                res = sweep_direct(self.gnb_cb, link.codebook, link.h_sd, noise_param)
                link.sweep = res
            link.report_cache = None
            self.sweep_log.append((epoch, ue_id, link.sweep.predicted_snr_db))

    def _sinr_report(self, link: _UeLink, t: float) -> SinrReport:
        # zero-Doppler realizations are time-invariant within an epoch, so the
        # per-subband report computed at the epoch start is exact for every slot
        if link.report_cache is not None:
            return replace(link.report_cache, timestamp_s=t)
        if self.relayed:
            faded = small_scale_psd(link.lt,
                                    link.h_rd.dopplers_hz, link.h_sr.dopplers_hz,
                                    link.h_rd.delays_s, link.h_sr.delays_s,
                                    t, self.grid, self.tx_psd)
            rx = attenuate(faded, self.pl_sr_db + link.pl_rd_db)
            per_db = sinr_per_subband(rx, [], self.noise_psd,
                                      af_noise_w=link.af_noise_at_ue_w)
        else:
            w_s = self.gnb_cb.codewords[link.sweep.w_s_idx]
            w_d = link.codebook.codewords[link.sweep.w_d_idx]
            rx = direct_psd(w_s, w_d, link.h_sd, t, self.grid, self.tx_psd,
                            blockage_db=link.blockage_db, path_loss_db=link.pl_sd_db)
            per_db = sinr_per_subband(rx, [], self.noise_psd)
        report = make_report(per_db, t)
        reals = (link.h_rd, link.h_sr) if self.relayed else (link.h_sd,)
        if all(not r.dopplers_hz.any() for r in reals):
            link.report_cache = report
        return report

    # ------------------------------------------------------------ event loop
    def run(self) -> RunResult:
        cfg = self.cfg
        t_start = _time.time()
        self.sweep_log: list[tuple[int, int, float]] = []
        self.trace = SinrTrace()
        self._span_packets: dict[int, Packet] = {}
        self.all_packets: dict[int, list[Packet]] = {uid: [] for uid in self.links}
        self._arrivals = {}
        for order, uid in enumerate(sorted(self.links)):
            pkts = generate_arrivals(self.source, 0.0, cfg.duration_s,
                                     ue=uid, start_id=order * 10_000_000)
            self._arrivals[uid] = pkts
            self.all_packets[uid] = pkts

        self._refresh_channels(epoch=0, now=0.0)

        counter = itertools.count()
        events: list[tuple[float, int, str, tuple]] = []

        def push(t, kind, payload=()):
            heapq.heappush(events, (t, next(counter), kind, payload))

        for uid in sorted(self.links):
            if self._arrivals[uid]:
                push(self._arrivals[uid][0].t_gen_s, "arrival", (uid, 0))
        push(0.0, "slot", (0,))
        push(self.coherence_s, "epoch", (1,))
        push(cfg.duration_s, "end")

        last_t = 0.0
        while events:
            t, _, kind, payload = heapq.heappop(events)
            if t < last_t:
                raise InvariantError(f"event at {t} scheduled before {last_t}")
            last_t = t
            if kind == "end":
                break
            if kind == "arrival":
                uid, idx = payload
                pkt = self._arrivals[uid][idx]
                enqueue(self.links[uid].queue, pkt)
                if idx + 1 < len(self._arrivals[uid]):
                    push(self._arrivals[uid][idx + 1].t_gen_s, "arrival", (uid, idx + 1))
            elif kind == "epoch":
                (epoch,) = payload
                self._refresh_channels(epoch, now=t)
                nxt = (epoch + 1) * self.coherence_s
                if nxt < cfg.duration_s:
                    push(nxt, "epoch", (epoch + 1,))
            elif kind == "slot":
                (slot,) = payload
                self._handle_slot(slot, t)
                nxt = (slot + 1) * cfg.slot_duration_s
                if nxt < cfg.duration_s:
                    push(nxt, "slot", (slot + 1,))

        return self._finalize(t_start)

    def _handle_slot(self, slot: int, t: float):
        backlogged = [uid for uid, link in self.links.items()
                      if link.queue.packets or link.pending_tb is not None]
        uid = schedule(backlogged, slot)
        if uid is None:
            return
        link = self.links[uid]
        report = self._sinr_report(link, t)
        self.trace.append(t, uid, report.effective_db)

        entry = self._select_mcs_with_beta(report)
        if entry.index < 0:
            return

        if link.pending_tb is not None:
            tb = link.pending_tb
        else:
            size = tb_size_bytes(entry, self.scenario.bandwidth_hz, self.clock,
                                 self.cfg.overhead_frac)
            if size <= 0:
                return
            tb = self._fill_tb(link, size, entry.index, slot)
            if tb is None:
                return
        self._transmit(link, tb, entry, report, t)

    def _select_mcs_with_beta(self, report: SinrReport) -> McsEntry:
        # per-entry EESM beta; with the default uniform beta = 1 this reduces
        # to thresholding the report's effective SINR
        chosen = NO_TRANSMISSION
        for entry in self.mcs_table:
            eff = (report.effective_db if entry.beta == 1.0
                   else effective_sinr(report.per_subband_db, entry.beta))
            if eff >= entry.min_sinr_db:
                chosen = entry
        return chosen

    def _fill_tb(self, link: _UeLink, size: int, mcs_idx: int,
                 slot: int) -> TransportBlock | None:
        q = link.queue
        spans: list[tuple[int, int]] = []
        remaining = size
        filled = 0
        while remaining > 0 and q.packets:
            p = q.packets[0]
            take = min(remaining, p.bytes - p.bytes_scheduled)
            p.bytes_scheduled += take
            p.status = PacketStatus.IN_FLIGHT
            q.occupancy_bytes -= take
            spans.append((p.id, take))
            self._span_packets[p.id] = p
            remaining -= take
            filled += take
            if p.bytes_scheduled >= p.bytes:
                q.packets.popleft()
        if not spans:
            return None
        return TransportBlock(ue=link.node.id, bytes=filled, mcs=mcs_idx,
                              slot=slot, attempt=1, spans=spans)

    def _transmit(self, link: _UeLink, tb: TransportBlock, entry: McsEntry,
                  report: SinrReport, t: float):
        for pid, _ in tb.spans:
            self._span_packets[pid].attempts += 1
        failed = tb_error(self.rng_l2sm, self.l2sm, entry, report.effective_db)
        if not failed:
            t_rx = t + self.cfg.slot_duration_s
            for pid, nbytes in tb.spans:
                p = self._span_packets[pid]
                p.bytes_delivered += nbytes
                if p.bytes_delivered >= p.bytes and p.status is not PacketStatus.LOST:
                    p.status = PacketStatus.DELIVERED
                    p.t_rx_s = t_rx
            link.pending_tb = None
        else:
            nxt = arq_on_failure(tb, self.cfg.max_retx)
            if nxt is not None:
                link.pending_tb = nxt
            else:
                for pid, _ in tb.spans:
                    p = self._span_packets[pid]
                    if p.status is not PacketStatus.DELIVERED:
                        p.status = PacketStatus.LOST
                link.pending_tb = None

    # -------------------------------------------------------------- results
    def _finalize(self, t_start: float) -> RunResult:
        cfg = self.cfg
        per_ue: dict[int, UeMetrics] = {}
        all_pkts: list[Packet] = []
        for uid in sorted(self.links):
            pkts = self.all_packets[uid]
            all_pkts.extend(pkts)
            delivered = [p for p in pkts if p.status is PacketStatus.DELIVERED]
            lost = [p for p in pkts if p.status is PacketStatus.LOST]
            residual = [p for p in pkts if p.status in (PacketStatus.QUEUED,
                                                        PacketStatus.IN_FLIGHT)]
            if len(delivered) + len(lost) + len(residual) != len(pkts):
                raise InvariantError(f"packet conservation violated for UE {uid}")
            thr = throughput_bps(delivered, cfg.duration_s).get(uid, 0.0)
            p95 = latency_p95_s(delivered).get(uid)
            lmean = latency_mean_s(delivered).get(uid)
            sinrs = self.trace.for_ue(uid)
            per_ue[uid] = UeMetrics(
                throughput_bps=thr,
                latency_p95_s=p95,
                latency_mean_s=lmean,
                per=per(len(delivered), len(lost)),
                sinr_mean_db=float(sinrs.mean()) if len(sinrs) else None,
                generated=len(pkts),
                delivered=len(delivered),
                lost=len(lost),
                residual=len(residual),
            )
        summary = MetricsSummary(per_ue=per_ue, duration_s=cfg.duration_s)
        relay = self.relay_spec
        meta = {
            "scenario": self.scenario.name,
            "relay_kind": relay.kind if self.relayed else "none",
            "relay_elems": relay.n_elements if self.relayed else 0,
            "relay_label": relay.label if self.relayed else "none",
            "amp_gain_db": relay.amp_gain_db if (self.relayed and relay.kind == "af") else 0.0,
            "seed": cfg.seed,
            "duration_s": cfg.duration_s,
            "code_version": __version__,
            "wall_clock_s": round(_time.time() - t_start, 3),
            "config": _config_dict(cfg),
        }
        return RunResult(summary=summary, trace=self.trace, packets=all_pkts,
                         meta=meta, sweep_log=self.sweep_log)


def _config_dict(cfg: RunConfig) -> dict:
    return {k: getattr(cfg, k) for k in cfg.__dataclass_fields__}


def run(config: RunConfig) -> RunResult:
    """Run one simulation; write output files when config.out_dir is set."""
    result = _Engine(config).run()
    if config.out_dir:
        write_outputs(result, Path(config.out_dir), trace_packets=config.trace_packets)
    return result


def sinr_snapshot(config: RunConfig) -> dict[int, float]:
    """Per-UE effective SINR right after the first channel generation + sweep.

    Cheap probe for SINR-level studies: no traffic, no event loop.
    """
    return sinr_study(config, [config.seed])[0]


def sinr_study(config: RunConfig, seeds) -> list[dict[int, float]]:
    """Per-UE effective SINR snapshots over many channel seeds.

    Geometry, codebooks, and path losses are seed-independent, so one engine
    serves every seed; only the channel draw and sweep are repeated.
    """
    eng = _Engine(config)
    eng.trace = SinrTrace()
    eng._span_packets = {}
    out = []
    for seed in seeds:
        eng.cfg = replace(config, seed=seed)
        eng.sweep_log = []
        eng._refresh_channels(epoch=0, now=0.0)
        out.append({uid: eng._sinr_report(link, 0.0).effective_db
                    for uid, link in eng.links.items()})
    return out


# ------------------------------------------------------------------ outputs

SUMMARY_COLUMNS = ["run_id", "scenario", "relay_kind", "relay_elems", "amp_gain_db",
                   "seed", "ue", "throughput_bps", "latency_p95_ms",
                   "latency_mean_ms", "per", "sinr_mean_db"]


def run_id_of(meta: dict) -> str:
    return f"{meta['scenario']}_{meta['relay_label']}_seed{meta['seed']}"


def _fmt(x, spec: str) -> str:
    return "" if x is None else format(x, spec)


def summary_rows(result: RunResult) -> list[list[str]]:
    meta = result.meta
    rid = run_id_of(meta)
    rows = []
    for uid in sorted(result.per_ue):
        m = result.per_ue[uid]
        rows.append([
            rid, meta["scenario"], meta["relay_kind"], str(meta["relay_elems"]),
            _fmt(meta["amp_gain_db"], ".1f"), str(meta["seed"]), str(uid),
            _fmt(m.throughput_bps, ".3f"),
            _fmt(None if m.latency_p95_s is None else m.latency_p95_s * 1e3, ".4f"),
            _fmt(None if m.latency_mean_s is None else m.latency_mean_s * 1e3, ".4f"),
            _fmt(m.per, ".6f"),
            _fmt(m.sinr_mean_db, ".4f"),
        ])
    return rows


def _write_csv(path: Path, header: list[str], rows: list[list[str]]):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def write_outputs(result: RunResult, out_dir: Path, trace_packets: bool = False):
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(out_dir / "summary.csv", SUMMARY_COLUMNS, summary_rows(result))
    trace_rows = [[f"{t:.6f}", str(u), f"{e:.4f}"]
                  for t, u, e in zip(result.trace.t_s, result.trace.ue, result.trace.eff_db)]
    _write_csv(out_dir / "sinr_trace.csv", ["t_s", "ue", "eff_sinr_db"], trace_rows)
    if trace_packets:
        rows = [[str(p.id), str(p.ue), f"{p.t_gen_s:.6f}",
                 _fmt(p.t_rx_s, ".6f"), p.status.value, str(p.attempts)]
                for p in result.packets]
        _write_csv(out_dir / "packets.csv",
                   ["id", "ue", "t_gen_s", "t_rx_s", "status", "attempts"], rows)
    (out_dir / "run_meta.json").write_text(json.dumps(result.meta, indent=2, sort_keys=True))


# ----------------------------------------------------------------- campaign

def sweep_campaign(base: RunConfig, scenario_paths: list[str], relay_grid: list[str],
                   seeds: list[int], out_dir: str | Path) -> list[dict]:
    """Cartesian product of (scenario, relay config, seed); one row per run.

    Per-run outputs land in subdirectories; consolidated summary.csv,
    campaign.csv (one row per config x seed) and campaign_agg.csv
    (mean +- stddev per config) sit at the top level.
    """
    if not relay_grid:
        raise ConfigError("campaign grid must not be empty")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    all_rows: list[list[str]] = []
    campaign_rows: list[dict] = []
    for scenario in scenario_paths:
        for relay in relay_grid:
            for seed in seeds:
                cfg = replace(base, scenario_path=scenario, relay_override=relay,
                              seed=seed, out_dir=None)
                try:
                    result = run(cfg)
                except Exception as exc:
                    raise type(exc)(
                        f"campaign cell (scenario={scenario}, relay={relay}, "
                        f"seed={seed}) failed: {exc}") from exc
                rid = run_id_of(result.meta)
                write_outputs(result, out_dir / rid, trace_packets=base.trace_packets)
                all_rows.extend(summary_rows(result))
                s = result.summary
                lat = [m.latency_p95_s for m in s.per_ue.values()
                       if m.latency_p95_s is not None]
                campaign_rows.append({
                    "run_id": rid,
                    "scenario": result.meta["scenario"],
                    "relay_label": result.meta["relay_label"],
                    "relay_kind": result.meta["relay_kind"],
                    "relay_elems": result.meta["relay_elems"],
                    "amp_gain_db": result.meta["amp_gain_db"],
                    "seed": seed,
                    "throughput_bps": s.mean_throughput_bps,
                    "latency_p95_ms": (sum(lat) / len(lat) * 1e3) if lat else None,
                    "per": s.mean_per,
                    "sinr_mean_db": s.mean_sinr_db,
                })
    _write_csv(out_dir / "summary.csv", SUMMARY_COLUMNS, all_rows)

    cols = ["run_id", "scenario", "relay_label", "relay_kind", "relay_elems",
            "amp_gain_db", "seed", "throughput_bps", "latency_p95_ms", "per",
            "sinr_mean_db"]
    rows = [["" if r[c] is None else
             (_fmt(r[c], ".6f") if isinstance(r[c], float) else str(r[c]))
             for c in cols]
            for r in campaign_rows]
    _write_csv(out_dir / "campaign.csv", cols, rows)

    agg_rows = []
    seen = []
    for r in campaign_rows:
        key = (r["scenario"], r["relay_label"])
        if key not in seen:
            seen.append(key)
    for scenario, label in seen:
        cells = [r for r in campaign_rows
                 if (r["scenario"], r["relay_label"]) == (scenario, label)]
        agg = [scenario, label]
        for metric in ("throughput_bps", "latency_p95_ms", "per", "sinr_mean_db"):
            vals = [c[metric] for c in cells if c[metric] is not None]
            if vals:
                agg.append(f"{np.mean(vals):.6f}")
                agg.append(f"{np.std(vals):.6f}")
            else:
                agg.extend(["", ""])
        agg_rows.append(agg)
    _write_csv(out_dir / "campaign_agg.csv",
               ["scenario", "relay_label",
                "throughput_bps_mean", "throughput_bps_std",
                "latency_p95_ms_mean", "latency_p95_ms_std",
                "per_mean", "per_std", "sinr_mean_db_mean", "sinr_mean_db_std"],
               agg_rows)
    return campaign_rows
