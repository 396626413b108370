/**
 * Candidate strip model: one tile per candidate, masked to the selected
 * segment, with the current assignment badged. Kept DOM-free so tile
 * construction and click dispatch are unit-testable.
 */

export interface StripTile {
  cid: string;
  thumbUrl: string;
  isCurrent: boolean;
}

export function buildStrip(
  candidates: string[],
  currentChoice: string | null,
  thumbUrl: (cid: string) => string
): StripTile[] {
  return candidates.map((cid) => ({
    cid,
    thumbUrl: thumbUrl(cid),
    isCurrent: cid === currentChoice,
  }));
}

/**
 * Wire tile clicks so each click issues exactly one swap request; repeat
 * clicks while a request is pending are ignored by the caller's guard.
 */
export function onTileClick(
  tiles: StripTile[],
  cid: string,
  swap: (cid: string) => Promise<number | null>
): Promise<number | null> {
  if (!tiles.some((t) => t.cid === cid)) {
    return Promise.resolve(null);
  }
  return swap(cid);
}
