import { describe, expect, it } from 'vitest';

import { ApiClient, ApiError } from '../src/api.js';
import { MockService } from './mock_service.js';
import { recyclingLibrary } from './fixtures.js';

describe('ApiClient', () => {
  it('returns parsed payloads for 2xx responses', async () => {
    const service = new MockService();
    service.addSchema('recycling', recyclingLibrary());
    const client = new ApiClient('', service.fetch);
    const schema = await client.getSchema('recycling');
    expect(schema.version).toBe(1);
    expect(schema.library.events).toHaveLength(9);
  });

  it('raises ApiError with the structured code on 4xx', async () => {
    const client = new ApiClient('', new MockService().fetch);
    await expect(client.getSchema('ghost')).rejects.toMatchObject({
      code: 'NotFound',
      status: 404,
    });
  });

  it('maps network failure to an Unreachable error', async () => {
    const client = new ApiClient('', async () => {
      throw new Error('connection refused');
    });
    try {
      await client.listSchemas();
      expect.unreachable('should have thrown');
    } catch (err) {
      expect(err).toBeInstanceOf(ApiError);
      expect((err as ApiError).code).toBe('Unreachable');
      expect((err as ApiError).status).toBe(0);
    }
  });

  it('copes with non-JSON error bodies', async () => {
    const client = new ApiClient('', async () => new Response('boom', { status: 502 }));
    await expect(client.listSchemas()).rejects.toMatchObject({ code: 'HTTP502' });
  });

  it('lock conflict surfaces the Locked code', async () => {
    const service = new MockService();
    service.addSchema('recycling', recyclingLibrary());
    const client = new ApiClient('', service.fetch);
    await client.acquireLock('recycling', 'alice');
    await expect(client.acquireLock('recycling', 'bob')).rejects.toMatchObject({
      code: 'Locked',
      status: 423,
    });
  });
});
