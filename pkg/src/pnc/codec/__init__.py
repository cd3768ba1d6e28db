from pnc.codec.huffman import (ChannelCodeTable, build_huffman_tables,
                               canonical_codes, huffman_code_lengths,
                               load_tables, save_tables)
from pnc.codec.image_codec import (ChannelSegment, EncodedImage, deserialize_image,
                                   encode_channel, encode_latent, pack_raw6,
                                   serialize_image, unpack_raw6)
from pnc.codec.quantizer import (MAX_SYMBOL, NUM_LEVELS, dequantize_channel,
                                 quantize_channel)

__all__ = [
    "ChannelCodeTable", "ChannelSegment", "EncodedImage", "MAX_SYMBOL",
    "NUM_LEVELS", "build_huffman_tables", "canonical_codes", "dequantize_channel",
    "deserialize_image", "encode_channel", "encode_latent", "huffman_code_lengths",
    "load_tables", "pack_raw6", "quantize_channel", "save_tables",
    "serialize_image", "unpack_raw6",
]
