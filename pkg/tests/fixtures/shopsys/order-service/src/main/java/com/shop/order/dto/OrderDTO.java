package com.shop.order.dto;

public class OrderDTO {
    private Long id;

    public static class OrderSummaryDto {
        private int count;
    }
}
