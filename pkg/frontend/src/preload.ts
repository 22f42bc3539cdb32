// Stimulus preloading: the questionnaire must not start before every
// preload-flagged asset is fetched and cached locally.

import type { PreloadEntry } from "./spec.js";

export interface PreloadStatus {
  done: number;
  total: number;
  current: string | null;
  retrying: boolean;
}

export type FetchLike = (uri: string) => Promise<{ ok: boolean; blob(): Promise<Blob> }>;

export async function preloadAssets(
  manifest: PreloadEntry[],
  fetchFn: FetchLike,
  onStatus: (status: PreloadStatus) => void = () => {},
  retryDelayMs = 1500,
  sleep: (ms: number) => Promise<void> = (ms) => new Promise((r) => setTimeout(r, ms)),
): Promise<Map<string, Blob>> {
  const cache = new Map<string, Blob>();
  for (const [index, entry] of manifest.entries()) {
    let retrying = false;
    for (;;) {
      onStatus({ done: index, total: manifest.length, current: entry.uri, retrying });
      try {
        const response = await fetchFn(entry.uri);
        if (!response.ok) throw new Error(`fetch failed for ${entry.uri}`);
        cache.set(entry.asset_id, await response.blob());
        break;
      } catch {
        retrying = true; // participant-visible retry, never silent failure
        await sleep(retryDelayMs);
      }
    }
  }
  onStatus({ done: manifest.length, total: manifest.length,
             current: null, retrying: false });
  return cache;
}
