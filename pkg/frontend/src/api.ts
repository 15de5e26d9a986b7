// Thin client for the dating service; all screens consume only this.

import type { ArtifactDetail, DatingResponse } from "./types.js";

// Mirrors the server's default upload cap so oversized files fail fast
// client-side without a network round trip.
export const MAX_UPLOAD_BYTES = 8 * 1024 * 1024;

export class ApiError extends Error {
  constructor(
    public status: number,
    public userMessage: string,
  ) {
    super(userMessage);
  }
}

const STATUS_MESSAGES: Record<number, string> = {
  413: "Photo is too large for the server.",
  415: "That file is not a JPEG or PNG image.",
  422: "The image could not be decoded; it may be corrupted.",
  503: "The dating model is not loaded yet. Try again shortly.",
};

function messageFor(status: number): string {
  return STATUS_MESSAGES[status] ?? `Server error (${status}).`;
}

export async function dateImage(
  file: File,
  baseUrl = "",
): Promise<DatingResponse> {
  const form = new FormData();
  form.append("image", file, file.name || "photo");
  const response = await fetch(`${baseUrl}/api/v1/date`, {
    method: "POST",
    body: form,
  });
  if (!response.ok) {
    throw new ApiError(response.status, messageFor(response.status));
  }
  return (await response.json()) as DatingResponse;
}

export async function getArtifact(
  id: string,
  baseUrl = "",
): Promise<ArtifactDetail> {
  const response = await fetch(
    `${baseUrl}/api/v1/artifacts/${encodeURIComponent(id)}`,
  );
  if (!response.ok) {
    throw new ApiError(response.status, messageFor(response.status));
  }
  return (await response.json()) as ArtifactDetail;
}

export function artifactImageUrl(id: string, baseUrl = ""): string {
  return `${baseUrl}/api/v1/artifacts/${encodeURIComponent(id)}/image`;
}
