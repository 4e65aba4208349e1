"""
What goes over the uplink
=========================

Every message is a run of bits: safe flags, one absolute initialization and
then per-epoch corrections. Elias Gamma makes the stream self-delimiting.
"""
import numpy as np

from qce_lqr import codec

for n in (1, 2, 5, 17, 1000):
    print(f"EG({n}) = {codec.eg_encode(n).to_str()}")

# %%
# Absolute initialization on a dyadic grid
theta = np.array([1.1032, 0.9871])
eps = 1 / (9 * 948.2)
msg, rec = codec.absolute_init(theta, eps)
print(f"\nE = {msg.E}, z = {msg.z}, {msg.bit_cost()} bits, error {np.linalg.norm(rec - theta):.2e} <= {eps:.2e}")

# %%
# Lattice codebook and the adaptive multiplier
cb = codec.build_codebook(2, 0.5)
print(f"\n{cb.size} codewords, {cb.index_bits} index bits")
delta, s_base = np.array([0.8, -1.9]), 0.7
m = codec.adaptive_multiplier(np.linalg.norm(delta), s_base)
q, step = codec.quantize_innovation(delta, m * s_base, cb)
track = codec.Track(m, q, cb.index_bits)
print(f"m = {m}, codeword {q}, error {np.linalg.norm(step - delta):.3f} <= {0.5 * m * s_base:.3f}, "
      f"{track.bit_cost()} bits")

# %%
# Coordinate-wise quantizer used by the practical scheme
ct, rec = codec.coord_quantize([0.27, -0.031], 100)
stream = codec.encode_message(ct)
print(f"\nindices {ct.index}, signs {ct.negative}, bits {stream.to_str()} -> {rec}")
