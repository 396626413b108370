/**
 * Client-side editing state for one session tab.
 *
 * Holds the loaded session summary, the hovered/selected segment, the
 * before/after display toggle, and the single-slot in-flight mutation guard.
 * Mutations are optimistic: the displayed revision is bumped immediately and
 * rolled back when the server rejects the request.
 */

import {
  ApiRequestError,
  SessionClient,
  type SessionSummary,
} from "./api.js";
import { decodeRle, labelAt, type SegmentMap } from "./rle.js";

export type ViewListener = (state: ViewState) => void;

export class ViewState {
  summary: SessionSummary | null = null;
  segments: SegmentMap | null = null;
  hoveredSegment = -1;
  selectedSegment = -1;
  showBefore = false;
  /** Revision currently shown; tracks summary.revision except mid-mutation. */
  displayedRevision = 0;
  inFlight = false;
  errorBanner: string | null = null;

  private listeners: ViewListener[] = [];

  constructor(public client: SessionClient) {}

  subscribe(listener: ViewListener): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener(this);
  }

  get sessionId(): string {
    if (!this.summary) throw new Error("no session loaded");
    return this.summary.id;
  }

  get canUndo(): boolean {
    return this.displayedRevision > 0 && !this.inFlight;
  }

  async load(sessionId: string): Promise<void> {
    const summary = await this.client.getSession(sessionId);
    this.applySummary(summary);
  }

  applySummary(summary: SessionSummary): void {
    this.summary = summary;
    try {
      this.segments = decodeRle({
        width: summary.width,
        height: summary.height,
        rle: summary.segment_rle,
      });
      this.errorBanner = null;
    } catch (err) {
      this.segments = null;
      this.errorBanner = `segment map decode failed: ${(err as Error).message}`;
    }
    this.displayedRevision = summary.revision;
    if (this.selectedSegment >= summary.segments) this.selectedSegment = -1;
    this.notify();
  }

  /** Hover/select from canvas pixel coordinates; outside the image deselects. */
  hover(x: number, y: number): void {
    if (!this.segments) return;
    const label = labelAt(this.segments, x, y);
    if (label !== this.hoveredSegment) {
      this.hoveredSegment = label;
      this.notify();
    }
  }

  select(x: number, y: number): void {
    if (!this.segments) return;
    this.selectedSegment = labelAt(this.segments, x, y);
    this.notify();
  }

  toggleBefore(): void {
    this.showBefore = !this.showBefore;
    this.notify();
  }

  /** Assigned candidate id for a segment, or null for an uploaded patch. */
  currentChoice(j: number): string | null {
    const entry = this.summary?.assignment.find((a) => a.j === j);
    return entry?.candidate ?? null;
  }

  /**
   * Swap the selected segment's source. Returns the new revision, or null
   * when the request was dropped (no selection / already in flight) or
   * rejected by the server. Rejection restores the prior revision and puts
   * the server message in the error banner.
   */
  async applySwap(j: number, candidate: string): Promise<number | null> {
    if (this.inFlight || !this.summary) return null;
    if (j < 0 || j >= this.summary.segments) return null;
    this.inFlight = true;
    const priorRevision = this.displayedRevision;
    this.displayedRevision = priorRevision + 1;
    this.errorBanner = null;
    this.notify();
    try {
      const { revision } = await this.client.swapSegment(
        this.sessionId,
        j,
        candidate
      );
      const summary = await this.client.getSession(this.sessionId);
      this.inFlight = false;
      this.applySummary(summary);
      return revision;
    } catch (err) {
      this.displayedRevision = priorRevision;
      this.inFlight = false;
      this.errorBanner =
        err instanceof ApiRequestError ? err.message : String(err);
      this.notify();
      return null;
    }
  }

  async applyUndo(): Promise<number | null> {
    if (this.inFlight || !this.summary || this.displayedRevision === 0) {
      return null;
    }
    this.inFlight = true;
    this.notify();
    try {
      const { revision } = await this.client.undo(this.sessionId);
      const summary = await this.client.getSession(this.sessionId);
      this.inFlight = false;
      this.applySummary(summary);
      return revision;
    } catch (err) {
      this.inFlight = false;
      this.errorBanner =
        err instanceof ApiRequestError ? err.message : String(err);
      this.notify();
      return null;
    }
  }
}
