/** Mesh loading for the 3D panel.
 *
 * Room meshes arrive as a small JSON manifest binding referencing three
 * artifacts: the OBJ text, the MTL text, and the texture PNG.  The OBJ uses
 * triangle faces with per-corner texture coordinates and one `g` line per
 * surface (floor, ceiling, wall_0, ...); the parser maps each surface to a
 * BufferGeometry group so the viewer can highlight surfaces independently.
 *
 * Texture v coordinates are stored with the origin at the top-left of the
 * panorama raster, so the texture must be flipped vertically when sampled
 * (three.js `Texture.flipY = true`, its default, matches this).
 */

import { BufferGeometry, Float32BufferAttribute, OrthographicCamera } from "three";

import type { ApiClient, BindingRecord } from "./api.js";

export interface MeshManifest {
  obj: string;
  mtl: string;
  texture: string;
}

export interface SurfaceGroup {
  tag: string;
  /** First triangle index and triangle count within the geometry. */
  start: number;
  count: number;
}

export interface ParsedMesh {
  geometry: BufferGeometry;
  groups: SurfaceGroup[];
  /** Axis-aligned plan bounds [minX, minY, maxX, maxY] in room metres. */
  planBounds: [number, number, number, number];
  heightBounds: [number, number];
}

export interface LoadedMesh extends ParsedMesh {
  textured: boolean;
  /** PNG bytes of the surface texture, when present. */
  textureBytes: Uint8Array | null;
  warnings: string[];
}

/** Parse roomsynth OBJ text into a grouped, non-indexed BufferGeometry. */
export function parseObj(text: string): ParsedMesh {
  const verts: number[][] = [];
  const vts: number[][] = [];
  const positions: number[] = [];
  const uvs: number[] = [];
  const groups: SurfaceGroup[] = [];
  let currentTag = "default";
  let triCount = 0;

  const openGroup = (tag: string) => {
    const last = groups[groups.length - 1];
    if (last && last.tag === tag) return;
    groups.push({ tag, start: triCount, count: 0 });
  };

  for (const raw of text.split("\n")) {
    const line = raw.trim();
    if (!line || line.startsWith("#")) continue;
    const parts = line.split(/\s+/);
    const kind = parts[0];
    if (kind === "v") {
      if (parts.length < 4) throw new Error("malformed vertex line");
      verts.push(parts.slice(1, 4).map(Number));
    } else if (kind === "vt") {
      if (parts.length < 3) throw new Error("malformed vt line");
      vts.push(parts.slice(1, 3).map(Number));
    } else if (kind === "g") {
      openGroup(parts[1] ?? "default");
    } else if (kind === "f") {
      if (parts.length !== 4) throw new Error("only triangle faces are supported");
      openGroup(currentTag);
      for (const token of parts.slice(1)) {
        const fields = token.split("/");
        const vi = Number(fields[0]) - 1;
        const v = verts[vi];
        if (!v || v.some((x) => !Number.isFinite(x))) {
          throw new Error(`face references missing vertex ${vi + 1}`);
        }
        positions.push(v[0]!, v[1]!, v[2]!);
        const ti = fields[1] ? Number(fields[1]) - 1 : -1;
        const t = ti >= 0 ? vts[ti] : undefined;
        uvs.push(t?.[0] ?? 0, t?.[1] ?? 0);
      }
      triCount += 1;
      groups[groups.length - 1]!.count += 1;
    }
    if (kind === "g") currentTag = parts[1] ?? "default";
  }
  if (triCount === 0) throw new Error("mesh has no faces");

  const geometry = new BufferGeometry();
  geometry.setAttribute("position", new Float32BufferAttribute(positions, 3));
  geometry.setAttribute("uv", new Float32BufferAttribute(uvs, 2));
  for (let i = 0; i < groups.length; i++) {
    geometry.addGroup(groups[i]!.start * 3, groups[i]!.count * 3, i);
  }

  let [minX, minY, maxX, maxY] = [Infinity, Infinity, -Infinity, -Infinity];
  let [minZ, maxZ] = [Infinity, -Infinity];
  for (const [x, y, z] of verts as [number, number, number][]) {
    minX = Math.min(minX, x); maxX = Math.max(maxX, x);
    minY = Math.min(minY, y); maxY = Math.max(maxY, y);
    minZ = Math.min(minZ, z); maxZ = Math.max(maxZ, z);
  }
  return {
    geometry,
    groups,
    planBounds: [minX, minY, maxX, maxY],
    heightBounds: [minZ, maxZ],
  };
}

/**
 * Fetch and parse the mesh behind a binding.  A missing or unreadable
 * texture downgrades to an untextured mesh with a warning instead of
 * failing, so the 3D panel can still render geometry.
 */
export async function loadMesh(
  api: ApiClient,
  binding: BindingRecord,
): Promise<LoadedMesh> {
  if (binding.type !== "mesh") {
    throw new Error(`binding ${binding.name} is ${binding.type}, not mesh`);
  }
  const manifest = await api.fetchArtifactJson<MeshManifest>(binding.digest);
  if (!manifest.obj) throw new Error("mesh manifest has no obj artifact");
  const objText = new TextDecoder().decode(
    await api.fetchArtifactBytes(manifest.obj),
  );
  const parsed = parseObj(objText);
  const warnings: string[] = [];
  let textureBytes: Uint8Array | null = null;
  if (manifest.texture) {
    try {
      textureBytes = await api.fetchArtifactBytes(manifest.texture);
    } catch {
      warnings.push("texture artifact unavailable; rendering untextured");
    }
  } else {
    warnings.push("mesh has no texture; rendering untextured");
  }
  return { ...parsed, textured: textureBytes !== null, textureBytes, warnings };
}

/**
 * Orthographic top view: camera above the room looking straight down, with
 * room +x to screen right and room +y to screen up, framing the whole plan
 * with a small margin.
 */
export function topViewPreset(
  mesh: ParsedMesh,
  margin = 0.05,
): OrthographicCamera {
  const [minX, minY, maxX, maxY] = mesh.planBounds;
  const cx = (minX + maxX) / 2;
  const cy = (minY + maxY) / 2;
  const half = (Math.max(maxX - minX, maxY - minY) / 2) * (1 + margin);
  const camera = new OrthographicCamera(-half, half, half, -half, 0.1, 100);
  const top = mesh.heightBounds[1];
  camera.position.set(cx, cy, top + 10);
  camera.up.set(0, 1, 0);
  camera.lookAt(cx, cy, 0);
  camera.updateProjectionMatrix();
  camera.updateMatrixWorld(true);
  return camera;
}
