/** Session history: every displayed result stores the exact request that
 * produced it, so any entry can be replayed byte-for-byte. */

export interface HistoryEntry<Req = unknown> {
  id: number;
  kind: 'trajectory' | 'vary' | 'sample' | 'generate';
  request: Req;
  label: string;
  parent: number | null; // provenance chain (e.g. variation reused as base)
  at: number;
}

export class SessionHistory {
  private entries: HistoryEntry[] = [];
  private nextId = 1;

  record<Req>(kind: HistoryEntry['kind'], request: Req, label: string,
              parent: number | null = null): HistoryEntry<Req> {
    // deep-copy so later UI state changes cannot mutate the stored request
    const frozen = JSON.parse(JSON.stringify(request)) as Req;
    const entry: HistoryEntry<Req> = {
      id: this.nextId++,
      kind,
      request: frozen,
      label,
      parent,
      at: Date.now(),
    };
    this.entries.push(entry);
    return entry;
  }

  get(id: number): HistoryEntry | undefined {
    return this.entries.find((e) => e.id === id);
  }

  all(): readonly HistoryEntry[] {
    return this.entries;
  }

  /** Ancestor ids from the entry to the root, for provenance display. */
  chain(id: number): number[] {
    const out: number[] = [];
    let cur = this.get(id);
    while (cur) {
      out.push(cur.id);
      cur = cur.parent === null ? undefined : this.get(cur.parent);
    }
    return out;
  }
}

/** Clamp the variation noise scale to the supported range. */
export function clampSigma(sigma: number): { value: number; clamped: boolean } {
  if (!isFinite(sigma)) return { value: 0, clamped: true };
  if (sigma < 0) return { value: 0, clamped: true };
  if (sigma > 6) return { value: 6, clamped: true };
  return { value: sigma, clamped: false };
}
